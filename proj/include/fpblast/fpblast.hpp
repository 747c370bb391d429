// Bit-blasting of IEEE-754 floating-point arithmetic to bit-vectors.
#pragma once

#include "fpblast/backend.hpp"
#include "fpblast/bitvec.hpp"
#include "fpblast/cnf.hpp"
#include "fpblast/demo.hpp"
#include "fpblast/difftest.hpp"
#include "fpblast/eval.hpp"
#include "fpblast/features.hpp"
#include "fpblast/fpformat.hpp"
#include "fpblast/ops.hpp"
#include "fpblast/oracle.hpp"
#include "fpblast/pipeline.hpp"
#include "fpblast/sat.hpp"
#include "fpblast/script.hpp"
#include "fpblast/sexpr.hpp"
#include "fpblast/sorts.hpp"

#pragma once

#include "advseq/adversary.hpp"
#include "advseq/defaults.hpp"
#include "advseq/error.hpp"
#include "advseq/geometry.hpp"
#include "advseq/lattice.hpp"
#include "advseq/oracle.hpp"
#include "advseq/prob.hpp"
#include "advseq/rng.hpp"
#include "advseq/sequential_test.hpp"
#include "advseq/simulation.hpp"

#pragma once

#include "ccsa/rng.hpp"
#include "ccsa/parallel.hpp"
#include "ccsa/curve.hpp"
#include "ccsa/dynamics.hpp"
#include "ccsa/swap.hpp"
#include "ccsa/regression.hpp"
#include "ccsa/costs.hpp"
#include "ccsa/toy_problem.hpp"
#include "ccsa/oracle.hpp"
#include "ccsa/solver.hpp"
#include "ccsa/scenario.hpp"

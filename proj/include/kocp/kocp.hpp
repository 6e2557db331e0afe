#pragma once

// Umbrella header for the k-th order cone programming toolkit.

#include "kocp/barrier.hpp"
#include "kocp/cones.hpp"
#include "kocp/index_family.hpp"
#include "kocp/json_io.hpp"
#include "kocp/matrix_ops.hpp"
#include "kocp/norms.hpp"
#include "kocp/polynomial.hpp"
#include "kocp/solver.hpp"
#include "kocp/special_cones.hpp"
#include "kocp/symmetric_matrix.hpp"

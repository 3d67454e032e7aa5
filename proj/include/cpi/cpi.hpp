// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "cpi/error.hpp"
#include "cpi/sparse.hpp"
#include "cpi/matrix_market.hpp"
#include "cpi/pencil.hpp"
#include "cpi/eigensolve.hpp"
#include "cpi/svd.hpp"
#include "cpi/planner.hpp"
#include "cpi/cpi_basis.hpp"
#include "cpi/basis_io.hpp"
#include "cpi/cms.hpp"
#include "cpi/fem.hpp"
#include "cpi/bench.hpp"

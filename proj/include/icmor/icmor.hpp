#pragma once

#include "icmor/core/error.hpp"
#include "icmor/core/lti_system.hpp"
#include "icmor/core/state_matrix.hpp"
#include "icmor/io/matrix_market.hpp"
#include "icmor/io/system_io.hpp"
#include "icmor/solvers/gramian.hpp"
#include "icmor/solvers/lyapunov_dense.hpp"
#include "icmor/solvers/lyapunov_lowrank.hpp"
#include "icmor/solvers/residual.hpp"
#include "icmor/solvers/sylvester.hpp"
#include "icmor/reduction/balanced_truncation.hpp"
#include "icmor/reduction/initial_condition.hpp"
#include "icmor/reduction/interpolatory.hpp"
#include "icmor/reduction/report.hpp"
#include "icmor/estimator/error_gramian.hpp"
#include "icmor/simulate/error_metrics.hpp"
#include "icmor/simulate/input.hpp"
#include "icmor/simulate/integrate.hpp"
#include "icmor/simulate/mesh.hpp"
#include "icmor/benchmarks/beam.hpp"
#include "icmor/benchmarks/convdiff.hpp"
#include "icmor/experiment/config.hpp"
#include "icmor/experiment/csv.hpp"
#include "icmor/experiment/run.hpp"
#include "icmor/experiment/tables.hpp"

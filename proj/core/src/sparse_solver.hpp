#pragma once

#include <Eigen/Sparse>

#ifdef BHE_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#else
#include <Eigen/SparseLU>
#endif

namespace bhe::detail {

#ifdef BHE_HAVE_UMFPACK
template <typename Matrix>
using SparseSolver = Eigen::UmfPackLU<Matrix>;
#else
template <typename Matrix>
using SparseSolver = Eigen::SparseLU<Matrix, Eigen::COLAMDOrdering<int>>;
#endif

}  // namespace bhe::detail

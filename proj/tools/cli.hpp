#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "bseries/bck.hpp"
#include "bseries/lbseries.hpp"

namespace bseries::cli {

// Runs one command line (without the program name). Returns 0 on success, 1 on usage errors
// (bad flags, unparsable input) and 2 on domain errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Text renderers shared with the golden tests.
std::string format_tensor_sum(const LinComb<Tensor<Forest>>& x);
std::string format_tensor_sum(const LinComb<Tensor<PlanarForest>>& x);
std::string format_tensor_sum(const LinComb<Tensor<BellWord>>& x);
// One "tree<TAB>value" line per tree of order 1..N, in enumeration order.
std::string format_tree_values(const BCoeff& a, int N);
// One "forest<TAB>value" line per planar forest of order 1..N.
std::string format_forest_values(const LBCoeff& a, int N);

}  // namespace bseries::cli

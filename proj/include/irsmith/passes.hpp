#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "irsmith/ir.hpp"

namespace irsmith {

struct PassStats {
  std::string pass;
  std::size_t ops_removed = 0;
  std::size_t ops_rewritten = 0;
};

/// A pass left the module ill-formed, or an unknown pass was requested.
class PassError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Removes unused side-effect-free ops to a fixpoint. scf.while is never
/// removed, nor is anything containing one, since that could turn a
/// non-terminating program into a terminating one.
PassStats dce(Module& module);

/// Replaces ops with constant operands by their value, resolves selects and
/// scf.if with constant conditions, then cleans up with dce; to a fixpoint.
PassStats const_fold(Module& module);

/// Removes allocations that are only written, read into unused values, copied
/// into and deallocated, together with those uses; to a fixpoint with dce.
PassStats dead_alloc_elim(Module& module);

/// "const_fold", "dce", "dead_alloc_elim".
const std::vector<std::string>& pass_names();
PassStats run_pass(Module& module, std::string_view name);

/// Applies the passes in order, verifying after each one. Throws PassError
/// naming the pass that broke the module.
std::vector<PassStats> run_pipeline(Module& module, const std::vector<std::string>& passes);

/// Residual memory and call activity: the number of memref.* ops plus
/// func.call ops.
std::size_t liveness_metric(const Module& module);

}  // namespace irsmith

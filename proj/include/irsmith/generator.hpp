#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "irsmith/config.hpp"
#include "irsmith/ir.hpp"
#include "irsmith/registry.hpp"
#include "irsmith/rng.hpp"

namespace irsmith {

enum class TerminatorKind { Return, Yield, Condition };

struct GenerationStats {
  /// Largest generator-placed op tally of any block.
  std::size_t max_block_ops = 0;
  /// Deepest region depth at which an op was placed (function body = 1).
  std::size_t max_region_depth = 0;
  std::size_t rollbacks = 0;
};

class GeneratorError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Insertion point, visible-value environment, limits and rollback stack
/// for one generation run. Generate hooks drive it through the public API.
class GeneratorState {
 public:
  GeneratorState(Module& module, const Registry& registry, const GeneratorConfig& config,
                 std::uint64_t seed);
  ~GeneratorState();
  GeneratorState(const GeneratorState&) = delete;
  GeneratorState& operator=(const GeneratorState&) = delete;

  Module& module() { return module_; }
  const Module& module() const { return module_; }
  const Registry& registry() const { return registry_; }
  const GeneratorConfig& config() const { return config_; }
  Rng& rng() { return rng_; }
  const GenerationStats& stats() const { return stats_; }

  // --- position and limits -------------------------------------------------

  std::size_t region_depth() const;
  /// Whether an op with regions may be created here.
  bool can_open_region() const;
  /// Generator-placed ops in the current block.
  std::size_t block_tally() const;
  /// Ops that may still be placed in the current block.
  std::size_t block_room() const;

  // --- environment -----------------------------------------------------------

  const std::vector<ValueId>& visible(const Type& type) const;
  std::vector<Type> visible_types() const;
  std::vector<ValueId> visible_memrefs() const;

  // --- sampling and value production ----------------------------------------

  /// Union of generatable_types over enabled descriptors, sorted.
  std::vector<Type> type_universe() const;
  /// Geometric(typeSampleP) count of distinct types drawn uniformly from the
  /// type universe.
  std::vector<Type> sample_types();
  std::optional<ValueId> sample_value_of_type(const Type& type);
  /// Tries producing descriptors in weighted random order, each under a
  /// snapshot; the module is unchanged on failure.
  std::optional<ValueId> generate_value_of_type(const Type& type);
  /// New arith.constant with a random value; nullopt for memrefs or a full block.
  std::optional<ValueId> fresh_constant(const Type& type);
  /// Operand sourcing: existing value with probability reuseProb, else a newly
  /// generated one; each falls back to the other, then to a fresh constant.
  std::optional<ValueId> operand(const Type& type);
  /// Existing value only (call operands).
  std::optional<ValueId> existing_operand(const Type& type) { return sample_value_of_type(type); }

  // --- construction ----------------------------------------------------------

  /// Inserts at the insertion point unless it would exceed blockLength or
  /// regionDepthLimit. Results join the environment.
  GenOutcome create_checked(OpBuild build);
  /// Like create_checked for a single-result op.
  std::optional<ValueId> create_value(OpBuild build);
  /// Inserts without limit checks or tally (terminators, cleanup, epilogue).
  std::vector<ValueId> create_structural(OpBuild build);

  // --- rollback --------------------------------------------------------------

  void snapshot();
  /// Erases everything created since the most recent snapshot and pops it.
  void rollback();
  /// Pops the most recent snapshot, keeping its changes.
  void commit();
  std::size_t snapshot_depth() const { return snapshots_.size(); }

  /// Runs `fn` under a snapshot, rolling back when it fails.
  template <typename F>
  auto attempt(F&& fn) -> decltype(fn()) {
    snapshot();
    try {
      auto out = fn();
      if (out) commit();
      else rollback();
      return out;
    } catch (...) {
      rollback();
      throw;
    }
  }

  // --- blocks and regions ----------------------------------------------------

  /// Builds a detached single-block region one level deeper; `body` runs with
  /// the insertion point in the new block and the block arguments visible.
  std::optional<Region> build_region(const std::vector<Type>& arg_types,
                                     const std::function<bool()>& body);
  /// Fills the current block with up to U[0, blockLength] ops, then places a
  /// terminator of `kind` whose operands have the `required` types (for
  /// Condition the first required type is the i1 condition).
  bool generate_block(const std::vector<Type>& required, TerminatorKind kind);
  /// Places up to `count` ops via randomly ordered enabled descriptors.
  void fill_block(std::size_t count);
  /// Appends a memref.dealloc for every memref.alloc of the current block.
  void finalize_block_cleanup();

  /// Aux functions callable from the current position (those already in the module).
  std::vector<const Operation*> callable_functions() const;

  /// Positions the state at `position` of the top-level block of function
  /// `function_index`, with the values defined before it visible.
  void enter_function_block(std::size_t function_index, std::size_t position);
  void exit_block();

  // --- program drivers -------------------------------------------------------

  std::optional<Operation> generate_function(const std::string& name);
  Operation generate_main();

 private:
  struct Frame {
    Block* block = nullptr;
    std::size_t pos = 0;
    std::size_t tally = 0;
    std::size_t cap = 0;
    std::size_t depth = 1;
    std::size_t env_mark = 0;
    bool isolated = false;
    std::map<Type, std::vector<ValueId>> saved_env;
    std::vector<Type> saved_log;
  };
  struct Snapshot {
    std::size_t frame_count = 0;
    std::size_t pos = 0;
    std::size_t tally = 0;
    std::size_t env_log = 0;
    std::size_t values = 0;
    OpId next_op = 0;
    BlockId next_block = 0;
  };

  Frame& frame();
  const Frame& frame() const;
  void push_frame(Block& block, std::size_t position, std::size_t depth, bool isolated);
  void pop_frame();
  void define(ValueId v);
  void undo_env(std::size_t mark);
  std::vector<std::pair<const OpDescriptor*, double>> candidates_for(const Type& type) const;
  ValueId append_checksum_epilogue(std::size_t body_end);

  Module& module_;
  const Registry& registry_;
  const GeneratorConfig& config_;
  Rng rng_;
  GenerationStats stats_;
  std::vector<std::pair<const OpDescriptor*, double>> enabled_;
  std::vector<double> enabled_weights_;

  std::map<Type, std::vector<ValueId>> env_;
  std::vector<Type> env_log_;
  std::vector<Frame> frames_;
  std::vector<Snapshot> snapshots_;
  std::size_t value_depth_ = 0;
};

/// Generates a verified-by-construction module. Deterministic in
/// (registry, config, seed).
Module generate_program(const Registry& registry, const GeneratorConfig& config,
                        std::uint64_t seed, GenerationStats* stats = nullptr);

/// Built-in registry, seed taken from `config.seed`.
Module generate_program(const GeneratorConfig& config);

}  // namespace irsmith

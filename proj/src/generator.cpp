#include "irsmith/generator.hpp"

#include <algorithm>
#include <set>

#include "irsmith/numeric.hpp"

namespace irsmith {

namespace {

// Bound on nested generate_value_of_type calls; deeper requests fall back
// to existing values or constants.
constexpr std::size_t kMaxValueDepth = 2;

const std::vector<ValueId> kNoValues;

struct DepthGuard {
  explicit DepthGuard(std::size_t& d) : depth(d) { ++depth; }
  ~DepthGuard() { --depth; }
  std::size_t& depth;
};

std::string_view terminator_name(TerminatorKind kind) {
  switch (kind) {
    case TerminatorKind::Return:
      return "func.return";
    case TerminatorKind::Yield:
      return "scf.yield";
    case TerminatorKind::Condition:
      return "scf.condition";
  }
  return "";
}

}  // namespace

GeneratorState::GeneratorState(Module& module, const Registry& registry,
                               const GeneratorConfig& config, std::uint64_t seed)
    : module_(module),
      registry_(registry),
      config_(config),
      rng_(seed),
      enabled_(registry.enabled_descriptors(config)) {
  for (const auto& e : enabled_) enabled_weights_.push_back(e.second);
}

GeneratorState::~GeneratorState() = default;

// ---------------------------------------------------------------------------
// Frames and environment
// ---------------------------------------------------------------------------

GeneratorState::Frame& GeneratorState::frame() {
  if (frames_.empty()) throw GeneratorError("no insertion point");
  return frames_.back();
}

const GeneratorState::Frame& GeneratorState::frame() const {
  if (frames_.empty()) throw GeneratorError("no insertion point");
  return frames_.back();
}

void GeneratorState::push_frame(Block& block, std::size_t position, std::size_t depth,
                                bool isolated) {
  Frame f;
  f.block = &block;
  f.pos = position;
  f.depth = depth;
  f.cap = static_cast<std::size_t>(config_.blockLength);
  f.isolated = isolated;
  if (isolated) {
    f.saved_env = std::move(env_);
    f.saved_log = std::move(env_log_);
    env_.clear();
    env_log_.clear();
  }
  f.env_mark = env_log_.size();
  frames_.push_back(std::move(f));
  for (auto a : block.arguments) define(a);
}

void GeneratorState::pop_frame() {
  Frame& f = frame();
  if (f.isolated) {
    env_ = std::move(f.saved_env);
    env_log_ = std::move(f.saved_log);
  } else {
    undo_env(f.env_mark);
  }
  frames_.pop_back();
}

void GeneratorState::define(ValueId v) {
  const Type& t = module_.type_of(v);
  env_[t].push_back(v);
  env_log_.push_back(t);
}

void GeneratorState::undo_env(std::size_t mark) {
  while (env_log_.size() > mark) {
    auto it = env_.find(env_log_.back());
    it->second.pop_back();
    if (it->second.empty()) env_.erase(it);
    env_log_.pop_back();
  }
}

std::size_t GeneratorState::region_depth() const { return frame().depth; }

bool GeneratorState::can_open_region() const {
  return !frames_.empty() &&
         frame().depth < static_cast<std::size_t>(config_.regionDepthLimit);
}

std::size_t GeneratorState::block_tally() const { return frame().tally; }

std::size_t GeneratorState::block_room() const {
  const Frame& f = frame();
  return f.tally >= f.cap ? 0 : f.cap - f.tally;
}

const std::vector<ValueId>& GeneratorState::visible(const Type& type) const {
  auto it = env_.find(type);
  return it == env_.end() ? kNoValues : it->second;
}

std::vector<Type> GeneratorState::visible_types() const {
  std::vector<Type> out;
  for (const auto& [t, vs] : env_) out.push_back(t);
  return out;
}

std::vector<ValueId> GeneratorState::visible_memrefs() const {
  std::vector<ValueId> out;
  for (const auto& [t, vs] : env_) {
    if (t.is_memref()) out.insert(out.end(), vs.begin(), vs.end());
  }
  return out;
}

void GeneratorState::enter_function_block(std::size_t function_index, std::size_t position) {
  Operation& f = module_.functions.at(function_index);
  Block& b = f.regions.at(0).entry();
  if (position > b.ops.size()) throw GeneratorError("insertion position past block end");
  push_frame(b, position, 1, true);
  for (std::size_t i = 0; i < position; ++i) {
    for (auto r : b.ops[i].results) define(r);
  }
  frame().tally = position;
}

void GeneratorState::exit_block() { pop_frame(); }

// ---------------------------------------------------------------------------
// Construction and rollback
// ---------------------------------------------------------------------------

GenOutcome GeneratorState::create_checked(OpBuild build) {
  Frame& f = frame();
  if (f.tally >= f.cap) return std::nullopt;
  if (!build.regions.empty() && f.depth + 1 > static_cast<std::size_t>(config_.regionDepthLimit)) {
    return std::nullopt;
  }
  Operation op = make_op(module_, std::move(build));
  std::vector<ValueId> results = op.results;
  f.block->ops.insert(f.block->ops.begin() + static_cast<std::ptrdiff_t>(f.pos), std::move(op));
  ++f.pos;
  ++f.tally;
  stats_.max_block_ops = std::max(stats_.max_block_ops, f.tally);
  stats_.max_region_depth = std::max(stats_.max_region_depth, f.depth);
  for (auto r : results) define(r);
  return results;
}

std::optional<ValueId> GeneratorState::create_value(OpBuild build) {
  auto out = create_checked(std::move(build));
  if (!out || out->empty()) return std::nullopt;
  return out->front();
}

std::vector<ValueId> GeneratorState::create_structural(OpBuild build) {
  Frame& f = frame();
  Operation op = make_op(module_, std::move(build));
  std::vector<ValueId> results = op.results;
  f.block->ops.insert(f.block->ops.begin() + static_cast<std::ptrdiff_t>(f.pos), std::move(op));
  ++f.pos;
  return results;
}

void GeneratorState::snapshot() {
  const Frame& f = frame();
  snapshots_.push_back(Snapshot{frames_.size(), f.pos, f.tally, env_log_.size(),
                                module_.num_values(), module_.next_op_id(),
                                module_.next_block_id()});
}

void GeneratorState::rollback() {
  if (snapshots_.empty()) throw GeneratorError("rollback without a snapshot");
  Snapshot s = snapshots_.back();
  snapshots_.pop_back();
  if (frames_.size() != s.frame_count) throw GeneratorError("rollback across a region boundary");
  Frame& f = frame();
  auto& ops = f.block->ops;
  ops.erase(ops.begin() + static_cast<std::ptrdiff_t>(s.pos),
            ops.begin() + static_cast<std::ptrdiff_t>(f.pos));
  f.pos = s.pos;
  f.tally = s.tally;
  undo_env(s.env_log);
  module_.truncate_values(s.values);
  module_.reset_id_counters(s.next_op, s.next_block);
  ++stats_.rollbacks;
}

void GeneratorState::commit() {
  if (snapshots_.empty()) throw GeneratorError("commit without a snapshot");
  snapshots_.pop_back();
}

// ---------------------------------------------------------------------------
// Sampling and value production
// ---------------------------------------------------------------------------

std::vector<Type> GeneratorState::type_universe() const {
  std::set<Type> types;
  for (const auto& [d, w] : enabled_) {
    for (auto& t : d->generatable_types(*this)) types.insert(std::move(t));
  }
  return {types.begin(), types.end()};
}

std::vector<Type> GeneratorState::sample_types() {
  std::vector<Type> universe = type_universe();
  if (universe.empty()) return {};
  std::size_t k = std::min(rng_.geometric(config_.typeSampleP), universe.size());
  // Partial Fisher-Yates: the first k slots become a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + rng_.below(universe.size() - i);
    std::swap(universe[i], universe[j]);
  }
  universe.resize(k);
  return universe;
}

std::optional<ValueId> GeneratorState::sample_value_of_type(const Type& type) {
  const auto& vs = visible(type);
  if (vs.empty()) return std::nullopt;
  return vs[rng_.below(vs.size())];
}

std::vector<std::pair<const OpDescriptor*, double>> GeneratorState::candidates_for(
    const Type& type) const {
  std::vector<std::pair<const OpDescriptor*, double>> out;
  for (const auto& e : enabled_) {
    if (e.first->generates(*this, type)) out.push_back(e);
  }
  return out;
}

std::optional<ValueId> GeneratorState::generate_value_of_type(const Type& type) {
  if (value_depth_ >= kMaxValueDepth) return std::nullopt;
  auto cands = candidates_for(type);
  if (cands.empty()) return std::nullopt;
  std::vector<double> weights;
  for (const auto& c : cands) weights.push_back(c.second);
  DepthGuard guard(value_depth_);
  WeightedSequence order(rng_, weights);
  while (auto idx = order.next()) {
    const OpDescriptor& d = *cands[*idx].first;
    auto out = attempt([&]() -> GenOutcome {
      auto r = d.generate(*this, d, type);
      if (!r || r->empty() || module_.type_of(r->front()) != type) return std::nullopt;
      return r;
    });
    if (out) return out->front();
  }
  return std::nullopt;
}

std::optional<ValueId> GeneratorState::fresh_constant(const Type& type) {
  if (type.is_memref()) return std::nullopt;
  if (type.is_index()) return create_value(int_constant(type, rng_.range(0, 99)));
  if (type.is_int()) {
    const unsigned w = type.width();
    auto bits = rng_.next_u64() & width_mask(w);
    return create_value(int_constant(type, sign_extend(bits, w)));
  }
  double v;
  if (rng_.bernoulli(0.1)) {
    static constexpr double kSpecial[] = {0.0, 1.0, -1.0};
    v = kSpecial[rng_.below(3)];
  } else {
    v = -1000.0 + 2000.0 * rng_.uniform();
  }
  return create_value(float_constant(type, v));
}

std::optional<ValueId> GeneratorState::operand(const Type& type) {
  std::optional<ValueId> v;
  if (rng_.bernoulli(config_.reuseProb)) {
    v = sample_value_of_type(type);
    if (!v) v = generate_value_of_type(type);
  } else {
    v = generate_value_of_type(type);
    if (!v) v = sample_value_of_type(type);
  }
  if (!v) v = fresh_constant(type);
  return v;
}

// ---------------------------------------------------------------------------
// Blocks, regions, functions
// ---------------------------------------------------------------------------

std::optional<Region> GeneratorState::build_region(const std::vector<Type>& arg_types,
                                                   const std::function<bool()>& body) {
  if (!can_open_region()) return std::nullopt;
  const std::size_t depth = frame().depth + 1;
  Region region = make_region(module_, arg_types);
  push_frame(region.entry(), 0, depth, false);
  bool ok;
  try {
    ok = body();
  } catch (...) {
    pop_frame();
    throw;
  }
  pop_frame();
  if (!ok) return std::nullopt;
  return region;
}

void GeneratorState::fill_block(std::size_t count) {
  while (frame().tally < count && !enabled_.empty()) {
    const std::size_t before = frame().tally;
    bool placed = false;
    WeightedSequence order(rng_, enabled_weights_);
    while (auto idx = order.next()) {
      const OpDescriptor& d = *enabled_[*idx].first;
      auto out = attempt([&] { return d.generate(*this, d, std::nullopt); });
      if (out) {
        placed = true;
        break;
      }
    }
    if (!placed || frame().tally == before) break;
  }
}

void GeneratorState::finalize_block_cleanup() {
  std::vector<ValueId> allocated;
  for (const auto& op : frame().block->ops) {
    if (op.code == OpCode::Alloc) allocated.push_back(op.results[0]);
  }
  for (auto v : allocated) create_structural(OpBuild{"memref.dealloc", {v}, {}, {}, {}});
}

bool GeneratorState::generate_block(const std::vector<Type>& required, TerminatorKind kind) {
  const auto length = static_cast<std::size_t>(config_.blockLength);
  // Keep room for one fresh constant per terminator operand.
  const std::size_t reserve = std::min(required.size(), length);
  frame().cap = length - reserve;
  const auto k = static_cast<std::size_t>(rng_.range(0, config_.blockLength));
  fill_block(std::min(k, frame().cap));
  frame().cap = length;

  std::vector<ValueId> operands;
  for (const auto& t : required) {
    std::optional<ValueId> v = sample_value_of_type(t);
    if (!v) v = generate_value_of_type(t);
    if (!v) v = fresh_constant(t);
    if (!v) return false;
    operands.push_back(*v);
  }
  finalize_block_cleanup();
  create_structural(OpBuild{std::string(terminator_name(kind)), std::move(operands), {}, {}, {}});
  return true;
}

std::vector<const Operation*> GeneratorState::callable_functions() const {
  std::vector<const Operation*> out;
  for (const auto& f : module_.functions) {
    if (symbol_name(f) != "main") out.push_back(&f);
  }
  return out;
}

std::optional<Operation> GeneratorState::generate_function(const std::string& name) {
  const std::size_t values = module_.num_values();
  const OpId next_op = module_.next_op_id();
  const BlockId next_block = module_.next_block_id();

  const auto& scalars = scalar_types();
  std::vector<Type> params;
  const auto n = rng_.range(0, 3);
  for (std::int64_t i = 0; i < n; ++i) params.push_back(rng_.pick(scalars));
  Type result = rng_.pick(scalars);

  Operation f = make_function(module_, name, params, {result});
  push_frame(f.regions[0].entry(), 0, 1, true);
  bool ok;
  try {
    ok = generate_block({result}, TerminatorKind::Return);
  } catch (...) {
    pop_frame();
    throw;
  }
  pop_frame();
  if (!ok) {
    module_.truncate_values(values);
    module_.reset_id_counters(next_op, next_block);
    return std::nullopt;
  }
  return f;
}

ValueId GeneratorState::append_checksum_epilogue(std::size_t body_end) {
  const Block& block = *frame().block;
  std::vector<ValueId> folded;
  for (std::size_t i = 0; i < body_end; ++i) {
    for (auto r : block.ops[i].results) {
      const Type& t = module_.type_of(r);
      if (t.is_int_like() || (t.is_float() && config_.floatChecksum)) folded.push_back(r);
    }
  }

  const Type i32 = Type::integer(32);
  auto value = [&](OpBuild b) { return create_structural(std::move(b)).front(); };
  auto binary = [&](const char* name, ValueId a, ValueId b) {
    return value(OpBuild{name, {a, b}, {i32}, {}, {}});
  };
  auto cast = [&](const char* name, ValueId v) { return value(OpBuild{name, {v}, {i32}, {}, {}}); };

  ValueId acc = value(int_constant(i32, 0));
  const ValueId one = value(int_constant(i32, 1));
  const ValueId c31 = value(int_constant(i32, 31));
  std::vector<ValueId> codes;  // i32 constants 0..3, created on first float
  std::map<Type, ValueId> zeros;

  for (ValueId v : folded) {
    const Type t = module_.type_of(v);
    ValueId w = v;
    if (t.is_index()) {
      w = cast("arith.index_cast", v);
    } else if (t.is_int() && t.width() < 32) {
      w = cast("arith.extui", v);
    } else if (t.is_int() && t.width() > 32) {
      w = cast("arith.trunci", v);
    } else if (t.is_float()) {
      if (codes.empty()) {
        for (int c = 0; c < 4; ++c) codes.push_back(value(int_constant(i32, c)));
      }
      auto z = zeros.find(t);
      if (z == zeros.end()) z = zeros.emplace(t, value(float_constant(t, 0.0))).first;
      auto cmp = [&](const char* pred, ValueId a, ValueId b) {
        return value(OpBuild{"arith.cmpf", {a, b}, {Type::integer(1)}, {{"predicate", std::string(pred)}}, {}});
      };
      auto select = [&](ValueId c, ValueId a, ValueId b) {
        return value(OpBuild{"arith.select", {c, a, b}, {i32}, {}, {}});
      };
      ValueId is_nan = cmp("uno", v, v);
      ValueId is_neg = cmp("olt", v, z->second);
      ValueId is_zero = cmp("oeq", v, z->second);
      w = select(is_nan, codes[0], select(is_neg, codes[1], select(is_zero, codes[2], codes[3])));
    }
    ValueId x = binary("arith.xori", acc, w);
    acc = binary("arith.ori", binary("arith.shli", x, one), binary("arith.shrui", x, c31));
  }
  return acc;
}

Operation GeneratorState::generate_main() {
  Operation f = make_function(module_, "main", {}, {Type::integer(32)});
  push_frame(f.regions[0].entry(), 0, 1, true);
  try {
    const auto k = static_cast<std::size_t>(rng_.range(0, config_.blockLength));
    fill_block(k);
    ValueId checksum = append_checksum_epilogue(frame().pos);
    finalize_block_cleanup();
    create_structural(OpBuild{"func.return", {checksum}, {}, {}, {}});
  } catch (...) {
    pop_frame();
    throw;
  }
  pop_frame();
  return f;
}

Module generate_program(const Registry& registry, const GeneratorConfig& config,
                        std::uint64_t seed, GenerationStats* stats) {
  validate(config);
  Module m;
  GeneratorState state(m, registry, config, seed);
  const auto n = state.rng().range(0, config.maxFunctions);
  for (std::int64_t i = 0; i < n; ++i) {
    auto f = state.generate_function("f" + std::to_string(m.functions.size()));
    if (f) m.functions.push_back(std::move(*f));
  }
  m.functions.push_back(state.generate_main());
  if (stats) *stats = state.stats();
  return m;
}

Module generate_program(const GeneratorConfig& config) {
  static const Registry registry = builtin_registry();
  return generate_program(registry, config, config.seed);
}

}  // namespace irsmith

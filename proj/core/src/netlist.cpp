#include "htwb/netlist.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace htwb {

std::string_view to_string(GateKind kind) {
  switch (kind) {
    case GateKind::And: return "AND";
    case GateKind::Nand: return "NAND";
    case GateKind::Or: return "OR";
    case GateKind::Nor: return "NOR";
    case GateKind::Xor: return "XOR";
    case GateKind::Xnor: return "XNOR";
    case GateKind::Not: return "NOT";
    case GateKind::Buff: return "BUFF";
  }
  return "?";
}

std::optional<GateKind> gate_kind_from_name(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  if (upper == "AND") return GateKind::And;
  if (upper == "NAND") return GateKind::Nand;
  if (upper == "OR") return GateKind::Or;
  if (upper == "NOR") return GateKind::Nor;
  if (upper == "XOR") return GateKind::Xor;
  if (upper == "XNOR") return GateKind::Xnor;
  if (upper == "NOT" || upper == "INV") return GateKind::Not;
  if (upper == "BUFF" || upper == "BUF") return GateKind::Buff;
  return std::nullopt;
}

std::optional<NetId> Circuit::find_net(std::string_view name) const {
  auto it = name_to_id_.find(std::string(name));
  if (it == name_to_id_.end()) return std::nullopt;
  return it->second;
}

// --- builder ---

NetId CircuitBuilder::net(std::string_view name) {
  auto it = name_to_id_.find(std::string(name));
  if (it != name_to_id_.end()) return it->second;
  const NetId id = static_cast<NetId>(net_names_.size());
  net_names_.emplace_back(name);
  name_to_id_.emplace(net_names_.back(), id);
  is_input_.push_back(0);
  return id;
}

void CircuitBuilder::add_input(std::string_view name) {
  const NetId id = net(name);
  if (is_input_[id]) throw DuplicateDriver(std::string(name));
  is_input_[id] = 1;
  inputs_.push_back(id);
}

void CircuitBuilder::mark_output(std::string_view name) {
  outputs_.push_back(net(name));
}

NetId CircuitBuilder::add_gate(GateKind kind, std::string_view output,
                               std::span<const std::string_view> fanin) {
  std::vector<NetId> ids;
  ids.reserve(fanin.size());
  for (const auto& f : fanin) ids.push_back(net(f));
  return add_gate_ids(kind, net(output), ids);
}

NetId CircuitBuilder::add_gate_ids(GateKind kind, NetId output, std::span<const NetId> fanin) {
  const bool unary = kind == GateKind::Not || kind == GateKind::Buff;
  if (unary && fanin.size() != 1)
    throw SyntaxError(std::string(to_string(kind)) + " takes exactly one input, got " +
                      std::to_string(fanin.size()));
  if (!unary && fanin.size() < 2)
    throw SyntaxError(std::string(to_string(kind)) + " needs at least two inputs, got " +
                      std::to_string(fanin.size()));
  gates_.push_back(Gate{kind, output, std::vector<NetId>(fanin.begin(), fanin.end())});
  return output;
}

std::vector<std::uint32_t> topological_order(std::span<const Gate> gates,
                                             std::size_t net_count,
                                             const std::vector<std::string>& net_names) {
  std::vector<std::int32_t> driver(net_count, -1);
  for (std::size_t g = 0; g < gates.size(); ++g)
    driver[gates[g].output] = static_cast<std::int32_t>(g);

  // Gate-level in-degrees count fanins that are themselves gate outputs.
  std::vector<std::uint32_t> indegree(gates.size(), 0);
  std::vector<std::vector<std::uint32_t>> consumers(gates.size());
  for (std::size_t g = 0; g < gates.size(); ++g) {
    for (const NetId f : gates[g].fanin) {
      if (driver[f] >= 0) {
        ++indegree[g];
        consumers[driver[f]].push_back(static_cast<std::uint32_t>(g));
      }
    }
  }

  std::vector<std::uint32_t> ready;
  for (std::size_t g = 0; g < gates.size(); ++g)
    if (indegree[g] == 0) ready.push_back(static_cast<std::uint32_t>(g));

  std::vector<std::uint32_t> order;
  order.reserve(gates.size());
  for (std::size_t head = 0; head < ready.size(); ++head) {
    const std::uint32_t g = ready[head];
    order.push_back(g);
    for (const std::uint32_t c : consumers[g])
      if (--indegree[c] == 0) ready.push_back(c);
  }

  if (order.size() != gates.size()) {
    // Name some net on a cycle for the diagnostic.
    for (std::size_t g = 0; g < gates.size(); ++g) {
      if (indegree[g] != 0) throw CycleDetected("through net " + net_names[gates[g].output]);
    }
    throw CycleDetected("unknown net");
  }
  return order;
}

Circuit CircuitBuilder::build() && {
  std::vector<std::int32_t> drivers(net_names_.size(), -1);
  for (std::size_t g = 0; g < gates_.size(); ++g) {
    const NetId out = gates_[g].output;
    if (is_input_[out]) throw DuplicateDriver(net_names_[out]);
    if (drivers[out] != -1) throw DuplicateDriver(net_names_[out]);
    drivers[out] = static_cast<std::int32_t>(g);
  }
  for (NetId id = 0; id < net_names_.size(); ++id) {
    if (drivers[id] == -1 && !is_input_[id]) throw UndefinedSignal(net_names_[id]);
  }

  Circuit c;
  c.topo_ = topological_order(gates_, net_names_.size(), net_names_);

  // Fanout adjacency in CSR form.
  c.fanout_offsets_.assign(net_names_.size() + 1, 0);
  for (const Gate& g : gates_)
    for (const NetId f : g.fanin) ++c.fanout_offsets_[f + 1];
  for (std::size_t i = 1; i < c.fanout_offsets_.size(); ++i)
    c.fanout_offsets_[i] += c.fanout_offsets_[i - 1];
  c.fanout_flat_.resize(c.fanout_offsets_.back());
  {
    std::vector<std::uint32_t> cursor(c.fanout_offsets_.begin(), c.fanout_offsets_.end() - 1);
    for (std::size_t g = 0; g < gates_.size(); ++g)
      for (const NetId f : gates_[g].fanin)
        c.fanout_flat_[cursor[f]++] = static_cast<std::uint32_t>(g);
  }

  c.depth_.assign(net_names_.size(), 0);
  for (const std::uint32_t g : c.topo_) {
    std::uint32_t d = 0;
    for (const NetId f : gates_[g].fanin) d = std::max(d, c.depth_[f]);
    c.depth_[gates_[g].output] = d + 1;
  }

  c.is_output_.assign(net_names_.size(), 0);
  for (const NetId o : outputs_) c.is_output_[o] = 1;

  c.name_ = std::move(name_);
  c.net_names_ = std::move(net_names_);
  c.name_to_id_ = std::move(name_to_id_);
  c.inputs_ = std::move(inputs_);
  c.outputs_ = std::move(outputs_);
  c.gates_ = std::move(gates_);
  c.is_input_ = std::move(is_input_);
  c.drivers_ = std::move(drivers);
  return c;
}

// --- bench parser ---

namespace {

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Parses "KEYWORD(ident)" where KEYWORD already got matched case-insensitively.
std::string_view parse_paren_ident(std::string_view rest, std::size_t line_no) {
  rest = trim(rest);
  if (rest.empty() || rest.front() != '(')
    throw SyntaxError("expected '('", line_no);
  rest.remove_prefix(1);
  if (rest.empty() || rest.back() != ')')
    throw SyntaxError("expected ')'", line_no);
  rest.remove_suffix(1);
  rest = trim(rest);
  if (rest.empty()) throw SyntaxError("empty identifier", line_no);
  for (const char c : rest)
    if (!ident_char(c)) throw SyntaxError("bad identifier character", line_no);
  return rest;
}

bool keyword_is(std::string_view word, std::string_view upper_keyword) {
  if (word.size() != upper_keyword.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i)
    if (std::toupper(static_cast<unsigned char>(word[i])) != upper_keyword[i]) return false;
  return true;
}

}  // namespace

Circuit parse_bench(std::string_view text, std::string name) {
  CircuitBuilder builder(std::move(name));
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (const std::size_t eq = line.find('='); eq != std::string_view::npos) {
      const std::string_view lhs = trim(line.substr(0, eq));
      if (lhs.empty()) throw SyntaxError("missing output name", line_no);
      for (const char c : lhs)
        if (!ident_char(c)) throw SyntaxError("bad identifier character", line_no);

      std::string_view rhs = trim(line.substr(eq + 1));
      const std::size_t open = rhs.find('(');
      if (open == std::string_view::npos || rhs.back() != ')')
        throw SyntaxError("expected GATE(a, b, ...)", line_no);
      const std::string_view fn = trim(rhs.substr(0, open));
      const auto kind = gate_kind_from_name(fn);
      if (!kind) throw UnsupportedGate(std::string(fn), line_no);

      std::string_view args = rhs.substr(open + 1, rhs.size() - open - 2);
      std::vector<std::string_view> fanin;
      std::size_t start = 0;
      while (start <= args.size()) {
        const std::size_t comma = std::min(args.find(',', start), args.size());
        const std::string_view tok = trim(args.substr(start, comma - start));
        if (tok.empty()) throw SyntaxError("empty fanin", line_no);
        for (const char c : tok)
          if (!ident_char(c)) throw SyntaxError("bad identifier character", line_no);
        fanin.push_back(tok);
        if (comma == args.size()) break;
        start = comma + 1;
      }
      try {
        builder.add_gate(*kind, lhs, fanin);
      } catch (const SyntaxError& e) {
        throw SyntaxError(e.what(), line_no);  // attach location to arity errors
      }
      continue;
    }

    // INPUT(x) / OUTPUT(y)
    const std::size_t open = line.find('(');
    const std::string_view word = trim(line.substr(0, std::min(open, line.size())));
    if (keyword_is(word, "INPUT")) {
      builder.add_input(parse_paren_ident(line.substr(word.size()), line_no));
    } else if (keyword_is(word, "OUTPUT")) {
      builder.mark_output(parse_paren_ident(line.substr(word.size()), line_no));
    } else {
      throw SyntaxError("unrecognized statement", line_no);
    }
  }
  return std::move(builder).build();
}

Circuit parse_bench_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open netlist file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string stem = path.stem().string();
  return parse_bench(buf.str(), std::move(stem));
}

std::string write_bench(const Circuit& circuit) {
  std::ostringstream out;
  out << "# " << (circuit.name().empty() ? "circuit" : circuit.name()) << "\n";
  for (const NetId id : circuit.primary_inputs())
    out << "INPUT(" << circuit.net_name(id) << ")\n";
  for (const NetId id : circuit.primary_outputs())
    out << "OUTPUT(" << circuit.net_name(id) << ")\n";
  for (const std::uint32_t g : circuit.topo_order()) {
    const Gate& gate = circuit.gates()[g];
    out << circuit.net_name(gate.output) << " = " << to_string(gate.kind) << "(";
    for (std::size_t i = 0; i < gate.fanin.size(); ++i) {
      if (i) out << ", ";
      out << circuit.net_name(gate.fanin[i]);
    }
    out << ")\n";
  }
  return out.str();
}

std::string circuit_to_json(const Circuit& circuit) {
  nlohmann::json nets = nlohmann::json::array();
  for (NetId id = 0; id < circuit.net_count(); ++id) {
    const auto fanout = circuit.fanout_gates(id);
    nets.push_back({{"id", id},
                    {"name", circuit.net_name(id)},
                    {"depth", circuit.net_depth()[id]},
                    {"driver_gate", circuit.driver_gate(id)},
                    {"fanout_gates", std::vector<std::uint32_t>(fanout.begin(), fanout.end())}});
  }
  nlohmann::json gates = nlohmann::json::array();
  for (const Gate& g : circuit.gates()) {
    gates.push_back({{"kind", to_string(g.kind)}, {"output", g.output}, {"fanin", g.fanin}});
  }
  const nlohmann::json doc = {{"name", circuit.name()},
                              {"inputs", circuit.primary_inputs()},
                              {"outputs", circuit.primary_outputs()},
                              {"nets", nets},
                              {"gates", gates},
                              {"topo_order", circuit.topo_order()}};
  return doc.dump(2);
}

}  // namespace htwb

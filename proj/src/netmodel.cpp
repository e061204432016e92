#include "qnu/netmodel.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qnu {

NodePair::NodePair(NodeId a, NodeId b) : lo_(std::min(a, b)), hi_(std::max(a, b)) {
  if (a == b) throw std::invalid_argument("NodePair: self pair (" + std::to_string(a) + ")");
}

NodeId NodePair::other(NodeId v) const {
  if (v == lo_) return hi_;
  if (v == hi_) return lo_;
  throw std::invalid_argument("NodePair::other: node is not an endpoint");
}

std::vector<NodePair> all_pairs(std::size_t num_nodes) {
  std::vector<NodePair> pairs;
  pairs.reserve(num_nodes * (num_nodes > 0 ? num_nodes - 1 : 0) / 2);
  for (NodeId a = 0; a < num_nodes; ++a)
    for (NodeId b = a + 1; b < num_nodes; ++b) pairs.emplace_back(a, b);
  return pairs;
}

NetworkSpec::NetworkSpec(std::vector<double> swap_efficiency, RateMap rates, double epsilon_eff)
    : swap_efficiency_(std::move(swap_efficiency)), rates_(std::move(rates)),
      epsilon_eff_(epsilon_eff) {
  // Zero-rate entries are the same as absent ones; keep the map canonical.
  std::erase_if(rates_, [](const auto& kv) { return kv.second == 0.0; });
  validate();
}

void NetworkSpec::validate() const {
  if (swap_efficiency_.size() < 2) throw std::invalid_argument("network: need at least 2 nodes");
  for (std::size_t c = 0; c < swap_efficiency_.size(); ++c) {
    const double q = swap_efficiency_[c];
    if (!(q >= 0.0 && q <= 1.0))
      throw std::invalid_argument("network: swap efficiency of node " + std::to_string(c) +
                                  " outside [0,1]");
  }
  for (const auto& [pair, f] : rates_) {
    if (pair.hi() >= swap_efficiency_.size())
      throw std::invalid_argument("network: link references unknown node " +
                                  std::to_string(pair.hi()));
    if (!(f >= 0.0) || !std::isfinite(f))
      throw std::invalid_argument("network: link rate must be finite and >= 0");
  }
  if (!(epsilon_eff_ >= 0.0) || !std::isfinite(epsilon_eff_))
    throw std::invalid_argument("network: epsilon_eff must be finite and >= 0");
  if (ebar_ && !(*ebar_ >= 0.0 && std::isfinite(*ebar_)))
    throw std::invalid_argument("network: ebar must be finite and >= 0");
}

NetworkSpec NetworkSpec::with_max_error(double ebar) const {
  NetworkSpec out = *this;
  out.ebar_ = ebar;
  out.epsilon_eff_ = 2.0 * ebar;
  out.validate();
  return out;
}

NetworkSpec NetworkSpec::with_epsilon(double epsilon_eff) const {
  NetworkSpec out = *this;
  out.ebar_.reset();
  out.epsilon_eff_ = epsilon_eff;
  out.validate();
  return out;
}

NetworkSpec NetworkSpec::with_swap_efficiency(double q) const {
  NetworkSpec out = *this;
  std::fill(out.swap_efficiency_.begin(), out.swap_efficiency_.end(), q);
  out.validate();
  return out;
}

NetworkSpec NetworkSpec::scaled_rates(double factor) const {
  if (!(factor > 0.0)) throw std::invalid_argument("network: scale factor must be > 0");
  NetworkSpec out = *this;
  for (auto& [pair, f] : out.rates_) f *= factor;
  out.validate();
  return out;
}

double NetworkSpec::rate(NodeId a, NodeId b) const {
  if (a == b) return 0.0;
  return rate(NodePair(a, b));
}

double NetworkSpec::rate(const NodePair& p) const {
  const auto it = rates_.find(p);
  return it == rates_.end() ? 0.0 : it->second;
}

std::vector<std::vector<NodeId>> NetworkSpec::adjacency() const {
  std::vector<std::vector<NodeId>> adj(num_nodes());
  for (const auto& [pair, f] : rates_) {
    if (f <= 0.0) continue;
    adj[pair.lo()].push_back(pair.hi());
    adj[pair.hi()].push_back(pair.lo());
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

NetworkSpec make_chain(std::size_t num_nodes, double link_rate, double swap_efficiency,
                       double epsilon_eff) {
  if (num_nodes < 2) throw std::invalid_argument("make_chain: need at least 2 nodes");
  if (!(link_rate > 0.0)) throw std::invalid_argument("make_chain: link rate must be > 0");
  NetworkSpec::RateMap rates;
  for (NodeId i = 0; i + 1 < num_nodes; ++i) rates.emplace(NodePair(i, i + 1), link_rate);
  return NetworkSpec(std::vector<double>(num_nodes, swap_efficiency), std::move(rates),
                     epsilon_eff);
}

NetworkSpec make_dumbbell(std::size_t side, double spoke_rate, double bar_rate,
                          double swap_efficiency, double epsilon_eff) {
  if (side < 1) throw std::invalid_argument("make_dumbbell: need at least one spoke per side");
  if (!(spoke_rate > 0.0) || !(bar_rate > 0.0))
    throw std::invalid_argument("make_dumbbell: rates must be > 0");
  const std::size_t total = 2 * side + 2;
  NetworkSpec::RateMap rates;
  rates.emplace(NodePair(0, 1), bar_rate);
  for (std::size_t k = 0; k < side; ++k) {
    rates.emplace(NodePair(0, 2 + k), spoke_rate);
    rates.emplace(NodePair(1, 2 + side + k), spoke_rate);
  }
  return NetworkSpec(std::vector<double>(total, swap_efficiency), std::move(rates), epsilon_eff);
}

NetworkSpec split_node(const NetworkSpec& net, NodeId node, std::size_t copies,
                       double local_rate) {
  if (node >= net.num_nodes()) throw std::invalid_argument("split_node: unknown node");
  if (copies < 2) throw std::invalid_argument("split_node: need at least 2 copies");
  if (!(local_rate > 0.0)) throw std::invalid_argument("split_node: local rate must be > 0");

  std::vector<NodeId> group{node};
  std::vector<double> q = net.swap_efficiencies();
  for (std::size_t k = 1; k < copies; ++k) {
    group.push_back(q.size());
    q.push_back(net.swap_efficiency(node));
  }
  NetworkSpec::RateMap rates = net.links();
  for (std::size_t i = 0; i < group.size(); ++i)
    for (std::size_t j = i + 1; j < group.size(); ++j)
      rates[NodePair(group[i], group[j])] = local_rate;

  NetworkSpec out(std::move(q), std::move(rates), net.epsilon_eff());
  if (net.max_error()) out = out.with_max_error(*net.max_error());
  return out;
}

namespace {

using nlohmann::json;

json to_json(const NetworkSpec& net) {
  json nodes = json::array();
  for (NodeId c = 0; c < net.num_nodes(); ++c)
    nodes.push_back({{"id", c}, {"q", net.swap_efficiency(c)}});
  json links = json::array();
  for (const auto& [pair, f] : net.links())
    links.push_back({{"a", pair.lo()}, {"b", pair.hi()}, {"rate", f}});
  json doc = {{"nodes", nodes}, {"links", links}, {"epsilon_eff", net.epsilon_eff()}};
  if (net.max_error()) doc["ebar"] = *net.max_error();
  return doc;
}

double number_field(const json& obj, const char* key, const char* where) {
  if (!obj.is_object() || !obj.contains(key) || !obj.at(key).is_number())
    throw std::invalid_argument(std::string("network file: ") + where + " needs numeric '" + key +
                                "'");
  return obj.at(key).get<double>();
}

NodeId id_field(const json& obj, const char* key, const char* where) {
  if (!obj.is_object() || !obj.contains(key) || !obj.at(key).is_number_integer() ||
      obj.at(key).get<long long>() < 0)
    throw std::invalid_argument(std::string("network file: ") + where +
                                " needs a non-negative integer '" + key + "'");
  return obj.at(key).get<NodeId>();
}

NetworkSpec from_json(const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("network file: top level must be an object");
  if (!doc.contains("nodes") || !doc.at("nodes").is_array())
    throw std::invalid_argument("network file: missing 'nodes' array");
  const auto& nodes = doc.at("nodes");
  std::vector<std::optional<double>> q(nodes.size());
  for (const auto& n : nodes) {
    const NodeId id = id_field(n, "id", "node");
    if (id >= nodes.size())
      throw std::invalid_argument("network file: node ids must be 0..M-1");
    if (q[id]) throw std::invalid_argument("network file: duplicate node id " + std::to_string(id));
    q[id] = number_field(n, "q", "node");
  }
  std::vector<double> swap(nodes.size());
  for (std::size_t i = 0; i < q.size(); ++i) swap[i] = *q[i];

  NetworkSpec::RateMap rates;
  if (doc.contains("links")) {
    if (!doc.at("links").is_array()) throw std::invalid_argument("network file: 'links' must be an array");
    for (const auto& l : doc.at("links")) {
      const NodeId a = id_field(l, "a", "link");
      const NodeId b = id_field(l, "b", "link");
      if (a == b) throw std::invalid_argument("network file: self link on node " + std::to_string(a));
      const double f = number_field(l, "rate", "link");
      const auto [it, inserted] = rates.emplace(NodePair(a, b), f);
      if (!inserted && it->second != f)
        throw std::invalid_argument("network file: asymmetric rates for pair (" +
                                    std::to_string(a) + "," + std::to_string(b) + ")");
    }
  }

  const bool has_eps = doc.contains("epsilon_eff");
  const bool has_ebar = doc.contains("ebar");
  const double eps = has_eps ? number_field(doc, "epsilon_eff", "document") : 0.0;
  NetworkSpec net(std::move(swap), std::move(rates), eps);
  if (has_ebar) {
    const double ebar = number_field(doc, "ebar", "document");
    if (has_eps && eps != 2.0 * ebar)
      throw std::invalid_argument("network file: epsilon_eff must equal 2*ebar when both are given");
    net = net.with_max_error(ebar);
  }
  return net;
}

}  // namespace

std::string to_json_string(const NetworkSpec& net) { return to_json(net).dump(2); }

NetworkSpec network_from_json_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("network file: malformed document: ") + e.what());
  }
  return from_json(doc);
}

NetworkSpec load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open network file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return network_from_json_string(buf.str());
}

void save_network(const NetworkSpec& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write network file " + path.string());
  out << to_json_string(net) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace qnu

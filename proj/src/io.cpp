#include "reconf/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace reconf {

namespace {

std::string joinKeys(const std::vector<std::string>& keys) {
  std::string out;
  for (const auto& k : keys) out += (out.empty() ? "" : ", ") + k;
  return out;
}

/// Reads fields of one JSON object, collecting every missing, mistyped or unknown key.
class ObjectReader {
 public:
  ObjectReader(const Json& obj, std::string prefix, std::vector<std::string>& bad)
      : obj_(obj), prefix_(std::move(prefix)), bad_(bad) {
    if (!obj_.is_object()) bad_.push_back(prefix_.empty() ? "<root>" : prefix_);
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.is_object() && obj_.contains(key);
  }

  template <class T>
  void get(const std::string& key, T& out, bool required = false) {
    if (!has(key)) {
      if (required) bad_.push_back(path(key));
      return;
    }
    try {
      out = obj_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      bad_.push_back(path(key));
    }
  }

  const Json* child(const std::string& key) {
    if (!has(key)) return nullptr;
    return &obj_.at(key);
  }

  std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  void finish() {
    if (!obj_.is_object()) return;
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.count(k)) bad_.push_back(path(k));
    }
  }

 private:
  const Json& obj_;
  std::string prefix_;
  std::vector<std::string>& bad_;
  std::set<std::string> seen_;
};

void checkSchema(ObjectReader& r, std::vector<std::string>& bad) {
  int version = 0;
  r.get("schema_version", version, true);
  if (r.has("schema_version") && version != kSchemaVersion) bad.push_back("schema_version");
}

void throwIfBad(std::vector<std::string>& bad) {
  if (bad.empty()) return;
  std::sort(bad.begin(), bad.end());
  bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
  throw ValidationError(std::move(bad));
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v == 0.0 ? 0.0 : v);
  return buf;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> keys)
    : Error("invalid or missing keys: " + joinKeys(keys)), keys_(std::move(keys)) {}

Json toJson(const ClusterState& cluster) {
  Json nodes = Json::array();
  for (const auto& n : cluster.nodes) {
    nodes.push_back({{"id", n.id.value}, {"capacity_weight", n.capacityWeight}, {"kill", n.kill}});
  }
  Json groups = Json::array();
  for (const auto& [g, s] : cluster.stats) {
    groups.push_back({{"id", g.value},
                      {"operator", s.op.value},
                      {"load", s.load},
                      {"state_size", s.stateSize},
                      {"migr_cost", s.migrCost},
                      {"node", cluster.allocation.at(g).value}});
  }
  return Json{{"schema_version", kSchemaVersion}, {"nodes", nodes}, {"key_groups", groups}};
}

ClusterState clusterFromJson(const Json& doc) {
  std::vector<std::string> bad;
  ObjectReader root(doc, "", bad);
  checkSchema(root, bad);
  ClusterState cluster;
  if (const Json* nodes = root.child("nodes"); nodes && nodes->is_array()) {
    for (std::size_t i = 0; i < nodes->size(); ++i) {
      ObjectReader r((*nodes)[i], "nodes[" + std::to_string(i) + "]", bad);
      NodeDescriptor n;
      r.get("id", n.id.value, true);
      r.get("capacity_weight", n.capacityWeight);
      r.get("kill", n.kill);
      r.finish();
      cluster.nodes.push_back(n);
    }
  } else {
    bad.push_back("nodes");
  }
  if (const Json* groups = root.child("key_groups"); groups && groups->is_array()) {
    for (std::size_t i = 0; i < groups->size(); ++i) {
      ObjectReader r((*groups)[i], "key_groups[" + std::to_string(i) + "]", bad);
      KeyGroupStat s;
      std::uint32_t node = 0;
      r.get("id", s.id.value, true);
      r.get("operator", s.op.value);
      r.get("load", s.load, true);
      r.get("state_size", s.stateSize);
      r.get("migr_cost", s.migrCost);
      r.get("node", node, true);
      r.finish();
      cluster.stats[s.id] = s;
      cluster.allocation[s.id] = NodeId{node};
    }
  } else {
    bad.push_back("key_groups");
  }
  root.has("traffic");
  root.finish();
  throwIfBad(bad);
  cluster.validate();
  return cluster;
}

Json toJson(const TrafficMatrix& traffic) {
  Json rates = Json::array();
  for (const auto& [pair, rate] : traffic.rates) rates.push_back({pair.first.value, pair.second.value, rate});
  Json downstream = Json::array();
  for (const auto& [op, outs] : traffic.downstream) {
    for (OperatorId d : outs) downstream.push_back({op.value, d.value});
  }
  return Json{{"rates", rates}, {"downstream", downstream}};
}

TrafficMatrix trafficFromJson(const Json& doc) {
  std::vector<std::string> bad;
  ObjectReader r(doc, "traffic", bad);
  TrafficMatrix traffic;
  try {
    if (const Json* rates = r.child("rates")) {
      for (const auto& row : *rates) {
        traffic.rates[{KeyGroupId{row.at(0).get<std::uint32_t>()}, KeyGroupId{row.at(1).get<std::uint32_t>()}}] =
            row.at(2).get<double>();
      }
    }
  } catch (const nlohmann::json::exception&) {
    bad.push_back("traffic.rates");
  }
  try {
    if (const Json* ds = r.child("downstream")) {
      for (const auto& row : *ds) {
        traffic.downstream[OperatorId{row.at(0).get<std::uint32_t>()}].insert(
            OperatorId{row.at(1).get<std::uint32_t>()});
      }
    }
  } catch (const nlohmann::json::exception&) {
    bad.push_back("traffic.downstream");
  }
  r.finish();
  throwIfBad(bad);
  return traffic;
}

Json snapshotToJson(const ClusterState& cluster, const TrafficMatrix* traffic) {
  Json doc = toJson(cluster);
  if (traffic) doc["traffic"] = toJson(*traffic);
  return doc;
}

Json toJson(const PlanReport& report) {
  Json migrations = Json::array();
  for (const auto& m : report.plan.migrations) {
    migrations.push_back({{"group", m.group.value}, {"from", m.from.value}, {"to", m.to.value}});
  }
  Json assignment = Json::array();
  for (const auto& [g, n] : report.plan.assignment) assignment.push_back({{"group", g.value}, {"node", n.value}});
  return Json{{"schema_version", kSchemaVersion},
              {"optimizer", report.optimizer},
              {"objective",
               {{"value", report.objectiveValue},
                {"best_bound", report.bestBound},
                {"optimal", report.optimal},
                {"d", report.plan.objective.d},
                {"du", report.plan.objective.du},
                {"dl", report.plan.objective.dl},
                {"total_migr_cost", report.plan.objective.totalMigrCost}}},
              {"load_distance_after", report.loadDistanceAfter},
              {"budget_spent", report.budgetSpent},
              {"migrations", migrations},
              {"assignment", assignment}};
}

Json toJson(const ScenarioConfig& c) {
  Json varies = Json::array();
  for (const auto& v : c.variesSchedule) varies.push_back({{"tick", v.tick}, {"varies", v.varies}});
  const auto& o = c.optimizer;
  Json opt{{"kind", to_string(o.kind)}, {"w1", o.milp.w1}, {"w2", o.milp.w2}, {"w_b", o.milp.wB}, {"time_limit", o.milp.timeLimit},
           {"seed", o.milp.seed}};
  if (!o.milp.budget.isUnbounded()) {
    if (o.milp.budget.mode == MigrationBudget::Mode::Count) {
      opt["max_migrations"] = static_cast<std::size_t>(o.milp.budget.limit);
    } else {
      opt["max_migr_cost"] = o.milp.budget.limit;
    }
  }
  opt["max_ld"] = o.albic.maxLD;
  opt["max_pl"] = o.albic.maxPL;
  opt["step_pl"] = o.albic.stepPL;
  opt["cola_max_ld"] = o.colaMaxLD;
  opt["potc"] = {{"hash_seed", o.potc.hashSeed},
                 {"keys_per_group", o.potc.keysPerGroup},
                 {"merge_interval_ticks", o.potc.mergeIntervalTicks},
                 {"merge_cost_factor", o.potc.mergeCostFactor}};
  const auto& s = c.scaling;
  return Json{{"schema_version", kSchemaVersion},
              {"nodes", c.nodes},
              {"key_groups_per_operator", c.keyGroupsPerOperator},
              {"operators", c.operators},
              {"pattern", to_string(c.pattern)},
              {"pattern_degree", c.patternDegree},
              {"collocatable_percent", c.collocatablePercent},
              {"varies_schedule", varies},
              {"jitter_range", c.jitterRange},
              {"base_node_load", c.baseNodeLoad},
              {"dominant_rate", c.dominantRate},
              {"comm_cost", c.commCost},
              {"sf", c.sF},
              {"placement", to_string(c.placement)},
              {"kill_nodes", c.killNodes},
              {"overload_nodes", c.overloadNodes},
              {"overload_load", c.overloadLoad},
              {"alpha", c.alpha},
              {"optimizer", opt},
              {"scaling",
               {{"enabled", s.enabled},
                {"target_utilization", s.targetUtilization},
                {"scale_out_threshold", s.scaleOutThreshold},
                {"scale_in_threshold", s.scaleInThreshold},
                {"min_nodes", s.minNodes},
                {"max_ld", s.maxLD}}},
              {"latency",
               {{"seconds_per_cost_unit", c.latency.secondsPerCostUnit},
                {"paused_while_migrating", c.latency.pausedWhileMigrating}}},
              {"spl_ticks", c.splTicks},
              {"total_ticks", c.totalTicks},
              {"seed", c.seed}};
}

ScenarioConfig scenarioFromJson(const Json& doc) {
  std::vector<std::string> bad;
  ObjectReader r(doc, "", bad);
  checkSchema(r, bad);
  ScenarioConfig c;
  r.get("nodes", c.nodes, true);
  r.get("key_groups_per_operator", c.keyGroupsPerOperator, true);
  r.get("operators", c.operators, true);
  std::string name;
  if (r.has("pattern")) {
    r.get("pattern", name);
    try {
      c.pattern = parsePattern(name);
    } catch (const Error&) {
      bad.push_back("pattern");
    }
  }
  r.get("pattern_degree", c.patternDegree);
  r.get("collocatable_percent", c.collocatablePercent);
  if (const Json* varies = r.child("varies_schedule")) {
    if (!varies->is_array()) bad.push_back("varies_schedule");
    for (std::size_t i = 0; varies->is_array() && i < varies->size(); ++i) {
      ObjectReader v((*varies)[i], "varies_schedule[" + std::to_string(i) + "]", bad);
      VariesEvent e;
      v.get("tick", e.tick, true);
      v.get("varies", e.varies, true);
      v.finish();
      c.variesSchedule.push_back(e);
    }
  }
  r.get("jitter_range", c.jitterRange);
  r.get("base_node_load", c.baseNodeLoad);
  r.get("dominant_rate", c.dominantRate);
  r.get("comm_cost", c.commCost);
  r.get("sf", c.sF);
  if (r.has("placement")) {
    r.get("placement", name);
    try {
      c.placement = parsePlacement(name);
    } catch (const Error&) {
      bad.push_back("placement");
    }
  }
  r.get("kill_nodes", c.killNodes);
  r.get("overload_nodes", c.overloadNodes);
  r.get("overload_load", c.overloadLoad);
  r.get("alpha", c.alpha);
  if (const Json* opt = r.child("optimizer")) {
    ObjectReader o(*opt, "optimizer", bad);
    auto& s = c.optimizer;
    if (o.has("kind")) {
      o.get("kind", name);
      try {
        s.kind = parseOptimizerKind(name);
      } catch (const Error&) {
        bad.push_back("optimizer.kind");
      }
    }
    o.get("w1", s.milp.w1);
    o.get("w2", s.milp.w2);
    o.get("w_b", s.milp.wB);
    o.get("time_limit", s.milp.timeLimit);
    o.get("seed", s.milp.seed);
    const bool count = o.has("max_migrations");
    const bool cost = o.has("max_migr_cost");
    if (count && cost) {
      bad.push_back("optimizer.max_migrations");
      bad.push_back("optimizer.max_migr_cost");
    } else if (count) {
      std::size_t n = 0;
      o.get("max_migrations", n);
      s.milp.budget = MigrationBudget::count(n);
    } else if (cost) {
      double limit = 0.0;
      o.get("max_migr_cost", limit);
      s.milp.budget = MigrationBudget::cost(limit);
    }
    o.get("max_ld", s.albic.maxLD);
    o.get("max_pl", s.albic.maxPL);
    o.get("step_pl", s.albic.stepPL);
    o.get("cola_max_ld", s.colaMaxLD);
    if (const Json* potc = o.child("potc")) {
      ObjectReader p(*potc, "optimizer.potc", bad);
      p.get("hash_seed", s.potc.hashSeed);
      p.get("keys_per_group", s.potc.keysPerGroup);
      p.get("merge_interval_ticks", s.potc.mergeIntervalTicks);
      p.get("merge_cost_factor", s.potc.mergeCostFactor);
      p.finish();
    }
    o.finish();
  }
  if (const Json* sc = r.child("scaling")) {
    ObjectReader p(*sc, "scaling", bad);
    p.get("enabled", c.scaling.enabled);
    p.get("target_utilization", c.scaling.targetUtilization);
    p.get("scale_out_threshold", c.scaling.scaleOutThreshold);
    p.get("scale_in_threshold", c.scaling.scaleInThreshold);
    p.get("min_nodes", c.scaling.minNodes);
    p.get("max_ld", c.scaling.maxLD);
    p.finish();
  }
  if (const Json* lat = r.child("latency")) {
    ObjectReader p(*lat, "latency", bad);
    p.get("seconds_per_cost_unit", c.latency.secondsPerCostUnit);
    p.get("paused_while_migrating", c.latency.pausedWhileMigrating);
    p.finish();
  }
  r.get("spl_ticks", c.splTicks);
  r.get("total_ticks", c.totalTicks, true);
  r.get("seed", c.seed);
  r.finish();
  throwIfBad(bad);
  c.validate();
  return c;
}

Json toJson(const WeightedGraph& graph) {
  Json vertices = Json::array();
  for (const auto& [v, w] : graph.vertices) vertices.push_back({{"id", v.value}, {"weight", w}});
  Json edges = Json::array();
  for (const auto& [e, w] : graph.edges) edges.push_back({{"a", e.first.value}, {"b", e.second.value}, {"weight", w}});
  return Json{{"schema_version", kSchemaVersion}, {"vertices", vertices}, {"edges", edges}};
}

WeightedGraph graphFromJson(const Json& doc) {
  std::vector<std::string> bad;
  ObjectReader r(doc, "", bad);
  checkSchema(r, bad);
  WeightedGraph graph;
  struct EdgeRow {
    std::uint32_t a = 0, b = 0;
    double w = 0.0;
  };
  std::vector<EdgeRow> edges;
  if (const Json* vs = r.child("vertices"); vs && vs->is_array()) {
    for (std::size_t i = 0; i < vs->size(); ++i) {
      ObjectReader v((*vs)[i], "vertices[" + std::to_string(i) + "]", bad);
      std::uint32_t id = 0;
      double w = 0.0;
      v.get("id", id, true);
      v.get("weight", w, true);
      v.finish();
      graph.vertices[KeyGroupId{id}] = w;
    }
  } else {
    bad.push_back("vertices");
  }
  if (const Json* es = r.child("edges")) {
    if (!es->is_array()) bad.push_back("edges");
    for (std::size_t i = 0; es->is_array() && i < es->size(); ++i) {
      ObjectReader e((*es)[i], "edges[" + std::to_string(i) + "]", bad);
      EdgeRow row;
      e.get("a", row.a, true);
      e.get("b", row.b, true);
      e.get("weight", row.w, true);
      e.finish();
      edges.push_back(row);
    }
  }
  r.finish();
  throwIfBad(bad);
  for (const auto& e : edges) graph.addEdge(KeyGroupId{e.a}, KeyGroupId{e.b}, e.w);
  graph.validate();
  return graph;
}

Json partitionToJson(const WeightedGraph& graph, const Partition& parts) {
  Json out = Json::array();
  for (const auto& part : parts) {
    Json members = Json::array();
    double weight = 0.0;
    for (KeyGroupId v : part) {
      members.push_back(v.value);
      weight += graph.vertices.at(v);
    }
    out.push_back({{"members", members}, {"weight", weight}});
  }
  return Json{{"schema_version", kSchemaVersion}, {"cut", cutWeight(graph, parts)}, {"parts", out}};
}

std::string metricsCsv(const MetricsSeries& series) {
  std::string out =
      "tick,optimizer,load_distance,load_index,collocation_factor,migrations,migration_latency_s,active_nodes\n";
  for (const auto& s : series.samples) {
    out += std::to_string(s.tick) + ',' + series.optimizer + ',' + fixed(s.loadDistance) + ',' + fixed(s.loadIndex) +
           ',' + fixed(s.collocationFactor) + ',' + std::to_string(s.migrations) + ',' + fixed(s.migrationLatency) +
           ',' + std::to_string(s.activeNodes) + '\n';
  }
  return out;
}

std::string tapeCsv(const WorkloadTape& tape) {
  std::string out = "tick,target,delta\n";
  char buf[64];
  for (const auto& e : tape.events) {
    std::snprintf(buf, sizeof buf, "%.17g", e.delta);
    out += std::to_string(e.tick) + ',' + (e.isNode ? 'n' : 'g') + std::to_string(e.id) + ',' + buf + '\n';
  }
  return out;
}

WorkloadTape parseTapeCsv(const std::string& text) {
  WorkloadTape tape;
  std::istringstream in(text);
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (lineNo == 1 && line.rfind("tick", 0) == 0)) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    const std::string where = "tape line " + std::to_string(lineNo);
    if (c2 == std::string::npos || c2 == c1 + 1) throw Error(where + ": expected tick,target,delta");
    TapeEvent e;
    try {
      std::size_t used = 0;
      const std::string tick = line.substr(0, c1);
      e.tick = std::stoi(tick, &used);
      if (used != tick.size() || e.tick < 0) throw Error("");
      const char kind = line[c1 + 1];
      if (kind != 'n' && kind != 'g') throw Error("");
      e.isNode = kind == 'n';
      const std::string id = line.substr(c1 + 2, c2 - c1 - 2);
      const unsigned long v = std::stoul(id, &used);
      if (used != id.size() || v > 0xffffffffUL) throw Error("");
      e.id = static_cast<std::uint32_t>(v);
      const std::string delta = line.substr(c2 + 1);
      e.delta = std::stod(delta, &used);
      if (used != delta.size()) throw Error("");
    } catch (const std::exception&) {
      throw Error(where + ": malformed entry '" + line + "'");
    }
    if (!tape.events.empty() && e.tick < tape.events.back().tick) throw Error(where + ": ticks must not decrease");
    tape.events.push_back(e);
  }
  return tape;
}

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json readJsonFile(const std::string& path) {
  const std::string text = readFile(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path + ": " + e.what());
  }
}

void writeFileAtomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace reconf

#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "reconf/core.hpp"
#include "reconf/milp.hpp"
#include "reconf/partition.hpp"
#include "reconf/sim.hpp"

namespace reconf {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Thrown for malformed input documents; keys() names every offending key.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> keys);
  const std::vector<std::string>& keys() const { return keys_; }

 private:
  std::vector<std::string> keys_;
};

Json toJson(const ClusterState& cluster);
ClusterState clusterFromJson(const Json& doc);

/// Snapshot files carry the cluster and, optionally, the traffic matrix under "traffic".
Json snapshotToJson(const ClusterState& cluster, const TrafficMatrix* traffic);
TrafficMatrix trafficFromJson(const Json& doc);
Json toJson(const TrafficMatrix& traffic);

struct PlanReport {
  std::string optimizer;
  AllocationPlan plan;
  double objectiveValue = 0.0;
  double bestBound = 0.0;
  bool optimal = false;
  double loadDistanceAfter = 0.0;
  double budgetSpent = 0.0;
};
Json toJson(const PlanReport& report);

Json toJson(const ScenarioConfig& config);
ScenarioConfig scenarioFromJson(const Json& doc);

Json toJson(const WeightedGraph& graph);
WeightedGraph graphFromJson(const Json& doc);
Json partitionToJson(const WeightedGraph& graph, const Partition& parts);

/// Header: tick,optimizer,load_distance,load_index,collocation_factor,migrations,migration_latency_s,active_nodes
std::string metricsCsv(const MetricsSeries& series);

/// Lines of tick,target,delta with target n<id> or g<id>, after a header line.
std::string tapeCsv(const WorkloadTape& tape);
WorkloadTape parseTapeCsv(const std::string& text);

std::string readFile(const std::string& path);
Json readJsonFile(const std::string& path);
/// Writes through a temporary file and rename, so readers never see partial output.
void writeFileAtomic(const std::string& path, const std::string& content);

}  // namespace reconf

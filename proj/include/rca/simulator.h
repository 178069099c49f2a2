#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "rca/model.h"
#include "rca/topology.h"

namespace rca {

enum class FaultKind { CpuHog, MemoryLeak, NetworkDelay };

/// "cpu-hog", "memory-leak", "net-delay".
std::string_view to_string(FaultKind k);
std::optional<FaultKind> parse_fault_kind(std::string_view s);

struct FaultScenario {
    FaultKind kind = FaultKind::CpuHog;
    std::string target_node;
    Layer target_layer = Layer::Container;
    /// CpuHog / MemoryLeak: fraction of the target's capacity consumed.
    /// NetworkDelay: added egress delay in milliseconds. Zero is a null fault.
    double magnitude = 0.4;
    double normal_duration = 300.0;
    double anomalous_duration = 300.0;
    std::uint64_t seed = 0;
};

struct GroundTruth {
    MetricId root_cause_metric;
};

struct SimulationOptions {
    double interval = 5.0;
    double workload_mean_users = 50.0;
    double workload_std_users = 10.0;
    /// Measurement noise std as a fraction of each metric's nominal level.
    double noise_fraction = 0.05;
    double start_time = 1'700'000'000.0;
};

struct SimulationResult {
    TimeSeriesDataset normal;
    TimeSeriesDataset anomalous;
    GroundTruth truth;
};

/// Services svc1..svcN (svc1 is the front end) each in one container
/// svcI-ctr, containers round-robined over vm1..vmM, all VMs on pm1. The
/// call graph is a random DAG rooted at svc1.
TopologyGraph generate_topology(int services, int vms, std::uint64_t seed);

/// Ground-truth metric for a scenario (independent of the data).
GroundTruth ground_truth_for(const FaultScenario &scenario);

/// Throws InvalidScenario when the target is missing, at the wrong layer,
/// the magnitude is negative, or the durations are not positive multiples
/// of the interval.
void validate_scenario(const TopologyGraph &graph, const FaultScenario &scenario,
                       const SimulationOptions &options);

/// Layered structural model over every catalog metric of every node.
/// Columns run bottom-up through the stack (machines, VMs, containers,
/// services); within a node they follow catalog order.
SimulationResult simulate(const TopologyGraph &graph, const FaultScenario &scenario,
                          const SimulationOptions &options = {});

} // namespace rca

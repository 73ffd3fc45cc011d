#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mb/brain.hpp"
#include "mb/rng.hpp"

namespace mb {

struct TaskSpec {
    std::size_t n_inputs = 1;
    std::size_t n_outputs = 1;
    /// Perception-action steps per lifetime.
    std::size_t lifetime = 200;
    int ticks_per_percept = 1;
};

/// One perception-action step as seen from outside the brain.
struct StepRecord {
    std::vector<double> percept;
    /// Label of the brain state after the step (see Brain::state_label).
    std::uint64_t label = 0;
    std::vector<double> outputs;
    /// Discretized outputs as a pattern index.
    std::uint32_t action = 0;
    bool scored = false;
    bool correct = false;
};

struct BehaviorLog {
    /// Brain state label right after reset; the state before step 0.
    std::uint64_t initial_label = 0;
    std::vector<StepRecord> steps;
    double score = 0.0;

    std::map<std::uint32_t, std::size_t> action_frequencies() const;
    /// Counts of (action at t, action at t+1).
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> action_bigrams() const;
};

/// Trace CSV: header, one row per step
/// (`step,in_0..,label,out_0..,action,scored,correct`), then `# score=<x>`.
void write_behavior_csv(const BehaviorLog& log, std::ostream& out);
BehaviorLog read_behavior_csv(std::istream& in);
void write_action_tables_csv(const BehaviorLog& log, std::ostream& out);

class Task {
public:
    virtual ~Task() = default;

    virtual std::string name() const = 0;
    virtual TaskSpec spec() const = 0;

    /// Runs one lifetime. The brain is reset with `brain_seed`; `env_seed`
    /// drives the world. Returns fitness in [0,1].
    virtual double run(Brain& brain, std::uint64_t env_seed, std::uint64_t brain_seed,
                       BehaviorLog* log = nullptr) const = 0;

    BrainLayout layout(std::size_t n_nodes, bool zero_outputs_before_update = false) const;
};

/// Feeds a random bit per step. From step k on, scores a point when the
/// discretized output equals the bit fed k updates before the output was
/// written (the output after step s lives at buffer time s+1, so it is
/// compared with the bit of step s+1-k).
class NBackTask final : public Task {
public:
    NBackTask(int k, std::size_t lifetime, int ticks_per_percept = 1);

    std::string name() const override { return "nback"; }
    TaskSpec spec() const override;
    double run(Brain& brain, std::uint64_t env_seed, std::uint64_t brain_seed,
               BehaviorLog* log = nullptr) const override;

    int k() const noexcept { return k_; }

private:
    int k_;
    std::size_t lifetime_;
    int ticks_;
};

/// Each lifetime draws a hidden map from the four 2-bit stimuli to the
/// correct action. Inputs: two stimulus bits and a reward bit that is 1 iff
/// the previous action was correct. Fitness is the fraction correct over
/// the second half of the lifetime.
class AssociationTask final : public Task {
public:
    explicit AssociationTask(std::size_t lifetime, int ticks_per_percept = 1);

    std::string name() const override { return "association"; }
    TaskSpec spec() const override;
    double run(Brain& brain, std::uint64_t env_seed, std::uint64_t brain_seed,
               BehaviorLog* log = nullptr) const override;

    /// The hidden stimulus -> action map drawn for `env_seed`.
    static std::array<int, 4> hidden_mapping(std::uint64_t env_seed);

private:
    std::size_t lifetime_;
    int ticks_;
};

struct TaskConfig {
    std::string name = "nback";
    int nback_k = 1;
    std::size_t lifetime = 200;
    int ticks_per_percept = 1;
};

/// Throws std::invalid_argument for an unknown task name or bad parameters.
std::unique_ptr<Task> make_task(const TaskConfig& cfg);

/// Mean fitness over `repeats` lifetimes; lifetime r uses
/// derive_seed(env_seed, {r}) and derive_seed(brain_seed, {r}).
double evaluate_brain(Brain& brain, const Task& task, std::uint64_t env_seed,
                      std::uint64_t brain_seed, int repeats = 1);

/// Single lifetime with the same seeding as evaluate_brain's first repeat.
BehaviorLog record_behavior(Brain& brain, const Task& task, std::uint64_t env_seed,
                            std::uint64_t brain_seed);

} // namespace mb

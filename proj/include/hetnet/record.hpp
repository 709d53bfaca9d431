#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "hetnet/env.hpp"

namespace hetnet {

// Per-episode averages of per-step quantities.
struct EpisodeMetrics {
  std::size_t episode = 0;
  double mean_reward = 0.0;
  double mean_fairness = 0.0;
  double mean_power_norm = 0.0;
  double mean_band_fraction = 0.0;
  double mean_sched_score = 0.0;
  std::size_t steps = 0;
};

struct TrainingRecord {
  std::uint64_t seed = 0;
  std::vector<EpisodeMetrics> episodes;

  std::size_t total_steps() const;
};

class EpisodeAccumulator {
 public:
  void add(const StepOutcome& outcome);
  EpisodeMetrics finish(std::size_t episode_index);
  std::size_t steps() const { return steps_; }

 private:
  double reward_ = 0.0;
  double fairness_ = 0.0;
  double power_ = 0.0;
  double band_ = 0.0;
  double score_ = 0.0;
  std::size_t steps_ = 0;
};

// Seeds for training episodes and for held-out evaluation episodes live in
// disjoint streams of the run seed.
std::uint64_t training_episode_seed(std::uint64_t run_seed, std::size_t episode);
std::uint64_t evaluation_episode_seed(std::uint64_t run_seed, std::size_t episode);

// Drives one environment across episode boundaries, resetting automatically
// and collecting per-episode metrics.
class EpisodeStream {
 public:
  EpisodeStream(HetNetEnv& env, std::uint64_t run_seed);

  const StateVector& state() const { return state_; }
  // The returned outcome keeps the terminal next_state; state() already
  // holds the first state of the next episode when outcome.done is set.
  StepOutcome step(std::span<const double> action);

  HetNetEnv& env() { return env_; }
  const std::vector<EpisodeMetrics>& finished() const { return finished_; }
  std::vector<EpisodeMetrics> take_finished() { return std::move(finished_); }

 private:
  HetNetEnv& env_;
  std::uint64_t run_seed_;
  std::size_t episode_ = 0;
  StateVector state_;
  EpisodeAccumulator acc_;
  std::vector<EpisodeMetrics> finished_;
};

void write_record_csv(std::ostream& out, const TrainingRecord& record);
TrainingRecord read_record_csv(std::istream& in, std::uint64_t seed = 0);
void save_record(const std::filesystem::path& path, const TrainingRecord& record);
TrainingRecord load_record(const std::filesystem::path& path, std::uint64_t seed = 0);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace hetnet

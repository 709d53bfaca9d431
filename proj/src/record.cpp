#include "hetnet/record.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "hetnet/rng.hpp"

namespace hetnet {

std::size_t TrainingRecord::total_steps() const {
  std::size_t n = 0;
  for (const auto& e : episodes) n += e.steps;
  return n;
}

void EpisodeAccumulator::add(const StepOutcome& outcome) {
  reward_ += outcome.reward;
  fairness_ += outcome.info.fairness;
  power_ += outcome.info.mean_power_norm;
  band_ += outcome.info.mean_band_fraction;
  score_ += outcome.info.mean_sched_score;
  ++steps_;
}

EpisodeMetrics EpisodeAccumulator::finish(std::size_t episode_index) {
  EpisodeMetrics m;
  m.episode = episode_index;
  m.steps = steps_;
  if (steps_ > 0) {
    double n = static_cast<double>(steps_);
    m.mean_reward = reward_ / n;
    m.mean_fairness = fairness_ / n;
    m.mean_power_norm = power_ / n;
    m.mean_band_fraction = band_ / n;
    m.mean_sched_score = score_ / n;
  }
  *this = EpisodeAccumulator{};
  return m;
}

std::uint64_t training_episode_seed(std::uint64_t run_seed, std::size_t episode) {
  return mix_seed(run_seed, 0x1000000ULL + episode);
}

std::uint64_t evaluation_episode_seed(std::uint64_t run_seed, std::size_t episode) {
  return mix_seed(run_seed, 0x2000000000ULL + episode);
}

EpisodeStream::EpisodeStream(HetNetEnv& env, std::uint64_t run_seed)
    : env_(env), run_seed_(run_seed) {
  state_ = env_.reset(training_episode_seed(run_seed_, episode_));
}

StepOutcome EpisodeStream::step(std::span<const double> action) {
  StepOutcome out = env_.step(action);
  acc_.add(out);
  if (out.done) {
    finished_.push_back(acc_.finish(episode_));
    ++episode_;
    state_ = env_.reset(training_episode_seed(run_seed_, episode_));
  } else {
    state_ = out.next_state;
  }
  return out;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_record_csv(std::ostream& out, const TrainingRecord& record) {
  out << "episode,mean_reward,mean_fairness,mean_power_norm,mean_band_fraction,mean_sched_score,steps\n";
  for (const auto& e : record.episodes) {
    out << e.episode << ',' << format_double(e.mean_reward) << ',' << format_double(e.mean_fairness)
        << ',' << format_double(e.mean_power_norm) << ',' << format_double(e.mean_band_fraction) << ','
        << format_double(e.mean_sched_score) << ',' << e.steps << '\n';
  }
}

TrainingRecord read_record_csv(std::istream& in, std::uint64_t seed) {
  TrainingRecord record;
  record.seed = seed;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("record: empty file");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      double x = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
      if (ec != std::errc()) throw std::runtime_error("record: bad number on line " + std::to_string(line_no));
      v.push_back(x);
    }
    if (v.size() != 7) throw std::runtime_error("record: expected 7 columns on line " + std::to_string(line_no));
    EpisodeMetrics e;
    e.episode = static_cast<std::size_t>(v[0]);
    e.mean_reward = v[1];
    e.mean_fairness = v[2];
    e.mean_power_norm = v[3];
    e.mean_band_fraction = v[4];
    e.mean_sched_score = v[5];
    e.steps = static_cast<std::size_t>(v[6]);
    record.episodes.push_back(e);
  }
  return record;
}

void save_record(const std::filesystem::path& path, const TrainingRecord& record) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write record " + path.string());
  write_record_csv(out, record);
}

TrainingRecord load_record(const std::filesystem::path& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open record " + path.string());
  return read_record_csv(in, seed);
}

}  // namespace hetnet

/*
 * Copyright 2026 The spikeopt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "spikeopt/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include <json.hpp>

#include "spikeopt/error.hpp"

namespace spikeopt {

namespace {

/// Blocking FIFO shared between the coordinator and the workers.
template <class T>
class Channel {
 public:
  void push(T value) {
    {
      std::lock_guard lock(mutex_);
      queue_.push_back(std::move(value));
    }
    ready_.notify_one();
  }

  /// Empty once closed and drained.
  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    ready_.wait(lock, [&] { return closed_ || !queue_.empty(); });
    if (queue_.empty()) return std::nullopt;
    T value = std::move(queue_.front());
    queue_.pop_front();
    return value;
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    ready_.notify_all();
  }

 private:
  std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<T> queue_;
  bool closed_ = false;
};

struct Job {
  std::uint64_t sequence;
  ParamConfig config;
  std::uint64_t seed;
};

struct Completion {
  std::uint64_t sequence;
  EvalStatus status;
  double objective;
  double wall_time_s;
  int worker;
  std::string error;
};

std::uint64_t proposal_seed(std::uint64_t search_seed, std::uint64_t sequence) {
  return derive_seed(search_seed, 2 * sequence + 1);
}

void write_text_atomically(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw Error(Errc::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::IoError, "cannot replace " + path.string() + ": " + ec.message());
}

}  // namespace

std::size_t default_init_random(std::size_t dim) { return std::max<std::size_t>(16, 2 * dim); }

const char* status_name(EvalStatus s) {
  switch (s) {
    case EvalStatus::Pending: return "pending";
    case EvalStatus::Done: return "done";
    case EvalStatus::Failed: return "failed";
  }
  return "?";
}

EvalStatus parse_status(std::string_view s) {
  if (s == "pending") return EvalStatus::Pending;
  if (s == "done") return EvalStatus::Done;
  if (s == "failed") return EvalStatus::Failed;
  throw Error(Errc::ConfigError, "unknown status '" + std::string(s) + "'");
}

std::size_t SearchResult::count(EvalStatus s) const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [&](const EvalRecord& r) { return r.status == s; }));
}

std::uint64_t objective_seed(std::uint64_t search_seed, std::uint64_t sequence) {
  return derive_seed(search_seed, 2 * sequence);
}

ParamConfig sample_random(const ParamSpace& space, Rng& rng) { return space.sample(rng); }

RandomForest fit_surrogate(const ParamSpace& space, std::span<const EvalRecord> records,
                           const ForestOptions& options, std::uint64_t seed) {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (const auto& r : records) {
    if (r.status != EvalStatus::Done) continue;
    x.push_back(space.features(r.config));
    y.push_back(r.objective);
  }
  return RandomForest::fit(x, y, options, seed);
}

std::size_t acquire_lcb(const RandomForest& model, const ParamSpace& space,
                        std::span<const ParamConfig> candidates, double kappa) {
  if (candidates.empty()) throw Error(Errc::Internal, "acquire_lcb needs at least one candidate");
  const bool infinite = std::isinf(kappa) && kappa > 0;
  std::size_t best = 0;
  double best_primary = 0.0;
  double best_secondary = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto p = model.predict(space.features(candidates[i]));
    const double primary = infinite ? p.spread : p.mean + kappa * p.spread;
    const double secondary = infinite ? p.mean : 0.0;
    if (i == 0 || primary > best_primary || (primary == best_primary && secondary > best_secondary)) {
      best = i;
      best_primary = primary;
      best_secondary = secondary;
    }
  }
  return best;
}

std::string results_csv_header(const ParamSpace& space) {
  std::string h = "sequence,status,objective,wall_time_s";
  for (const auto& d : space.dimensions()) h += "," + d.name;
  return h;
}

std::string results_csv_row(const ParamSpace& space, const EvalRecord& r) {
  std::string row = std::to_string(r.sequence) + "," + status_name(r.status) + ",";
  if (r.status == EvalStatus::Done) row += format_double(r.objective);
  row += "," + format_double(r.wall_time_s);
  for (std::size_t i = 0; i < space.size(); ++i) row += "," + space.format_value(i, r.config.values[i]);
  return row;
}

void save_checkpoint(const std::filesystem::path& path, const ParamSpace& space, const SearchOptions& options,
                     std::span<const EvalRecord> records) {
  using nlohmann::json;
  json j;
  j["format"] = "spikeopt-search-checkpoint";
  j["version"] = 1;
  j["seed"] = options.seed;
  j["budget"] = options.budget;
  json dims = json::array();
  for (const auto& d : space.dimensions()) dims.push_back(d.name);
  j["dimensions"] = dims;
  json meta = json::object();
  for (const auto& [k, v] : options.metadata.entries()) meta[k] = v;
  j["metadata"] = meta;
  json recs = json::array();
  for (const auto& r : records) {
    json jr;
    jr["sequence"] = r.sequence;
    jr["seed"] = r.seed;
    jr["status"] = status_name(r.status);
    if (r.status == EvalStatus::Done) jr["objective"] = r.objective;
    jr["wall_time_s"] = r.wall_time_s;
    jr["worker"] = r.worker;
    jr["values"] = r.config.values;
    if (!r.error.empty()) jr["error"] = r.error;
    recs.push_back(std::move(jr));
  }
  j["records"] = std::move(recs);
  write_text_atomically(path, j.dump(1));
}

SearchCheckpoint load_checkpoint(const std::filesystem::path& path) {
  using nlohmann::json;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open checkpoint " + path.string());
  try {
    const json j = json::parse(in);
    if (j.at("format").get<std::string>() != "spikeopt-search-checkpoint") {
      throw Error(Errc::IoError, path.string() + " is not a search checkpoint");
    }
    SearchCheckpoint c;
    c.seed = j.at("seed").get<std::uint64_t>();
    c.budget = j.at("budget").get<std::size_t>();
    c.dimensions = j.at("dimensions").get<std::vector<std::string>>();
    for (const auto& [k, v] : j.at("metadata").items()) c.metadata.set(k, v.get<std::string>());
    for (const auto& jr : j.at("records")) {
      EvalRecord r;
      r.sequence = jr.at("sequence").get<std::uint64_t>();
      r.seed = jr.at("seed").get<std::uint64_t>();
      r.status = parse_status(jr.at("status").get<std::string>());
      if (r.status == EvalStatus::Done) r.objective = jr.at("objective").get<double>();
      r.wall_time_s = jr.at("wall_time_s").get<double>();
      r.worker = jr.at("worker").get<int>();
      r.config.values = jr.at("values").get<std::vector<double>>();
      if (jr.contains("error")) r.error = jr.at("error").get<std::string>();
      c.records.push_back(std::move(r));
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(Errc::IoError, "malformed checkpoint " + path.string() + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::IoError) throw;
    throw Error(Errc::IoError, "malformed checkpoint " + path.string() + ": " + e.what());
  }
}

SearchResult run_search(const ParamSpace& space, const Objective& objective, const SearchOptions& options,
                        std::vector<EvalRecord> prior) {
  if (space.size() == 0) throw Error(Errc::ConfigError, "search space has no dimensions");
  if (options.n_workers == 0) throw Error(Errc::ConfigError, "need at least one worker");
  if (options.budget == 0) throw Error(Errc::ConfigError, "budget must be positive");
  const auto& ambs = options.ambs;
  const std::size_t init_random = ambs.init_random.value_or(default_init_random(space.size()));
  if (!options.random_only) {
    if (init_random < 2) throw Error(Errc::ConfigError, "init_random must be at least 2");
    if (options.budget < init_random) {
      throw Error(Errc::ConfigError, "budget " + std::to_string(options.budget) + " is below init_random " +
                                         std::to_string(init_random));
    }
    if (ambs.n_candidates == 0) throw Error(Errc::ConfigError, "n_candidates must be positive");
  }
  const ForestOptions forest_options{ambs.n_trees, ambs.min_leaf, ambs.max_depth, 1.0, true};

  std::vector<EvalRecord> records(options.budget);
  std::vector<bool> present(options.budget, false);
  std::set<std::vector<double>> dispatched;
  std::deque<Job> redispatch;
  std::sort(prior.begin(), prior.end(),
            [](const EvalRecord& a, const EvalRecord& b) { return a.sequence < b.sequence; });
  for (auto& r : prior) {
    if (r.sequence >= options.budget) {
      throw Error(Errc::ConfigError, "record " + std::to_string(r.sequence) + " exceeds budget " +
                                         std::to_string(options.budget));
    }
    if (present[r.sequence]) {
      throw Error(Errc::ConfigError, "duplicate record sequence " + std::to_string(r.sequence));
    }
    space.validate(r.config);
    present[r.sequence] = true;
    dispatched.insert(r.config.values);
    if (r.status == EvalStatus::Pending) redispatch.push_back({r.sequence, r.config, r.seed});
    records[r.sequence] = std::move(r);
  }
  std::uint64_t next_seq = 0;
  while (next_seq < options.budget && present[next_seq]) ++next_seq;
  for (std::uint64_t s = next_seq; s < options.budget; ++s) {
    if (present[s]) throw Error(Errc::ConfigError, "prior records are not a contiguous prefix");
  }

  std::ofstream csv;
  if (!options.results_csv.empty()) {
    csv.open(options.results_csv, std::ios::binary | std::ios::trunc);
    if (!csv) throw Error(Errc::IoError, "cannot write " + options.results_csv.string());
    csv << results_csv_header(space) << '\n';
    for (std::uint64_t s = 0; s < next_seq; ++s) {
      if (records[s].status != EvalStatus::Pending) csv << results_csv_row(space, records[s]) << '\n';
    }
    csv.flush();
  }
  const auto checkpoint = [&] {
    if (options.checkpoint.empty()) return;
    save_checkpoint(options.checkpoint, space, options, std::span(records.data(), next_seq));
  };

  const auto is_random_phase = [&](std::uint64_t seq) { return options.random_only || seq < init_random; };

  // Records the surrogate for proposal `seq` is allowed to see.
  const auto training_cutoff = [&](std::uint64_t seq) -> std::uint64_t {
    if (!ambs.fixed_lag) return next_seq;
    return seq > *ambs.fixed_lag ? seq - *ambs.fixed_lag : 0;
  };
  const auto ready = [&](std::uint64_t seq) {
    if (is_random_phase(seq) || !ambs.fixed_lag) return true;
    const auto cutoff = training_cutoff(seq);
    for (std::uint64_t s = 0; s < cutoff; ++s) {
      if (records[s].status == EvalStatus::Pending) return false;
    }
    return true;
  };

  std::vector<std::uint64_t> cached_training;
  std::optional<RandomForest> cached_model;

  const auto random_unique = [&](Rng& rng) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      auto c = sample_random(space, rng);
      if (!dispatched.contains(c.values)) return c;
    }
    throw Error(Errc::SpaceExhausted, "no undispatched configuration found after 1000 draws");
  };

  const auto propose = [&](std::uint64_t seq) -> ParamConfig {
    Rng rng(proposal_seed(options.seed, seq));
    if (is_random_phase(seq)) return random_unique(rng);
    const auto cutoff = training_cutoff(seq);
    std::vector<std::uint64_t> training;
    std::vector<EvalRecord> done;
    for (std::uint64_t s = 0; s < cutoff; ++s) {
      if (records[s].status == EvalStatus::Done) {
        training.push_back(s);
        done.push_back(records[s]);
      }
    }
    if (done.size() < 2) return random_unique(rng);
    if (!cached_model || training != cached_training) {
      const auto forest_seed = derive_seed(derive_seed(options.seed, 0xf0e57), training.size());
      cached_model = fit_surrogate(space, done, forest_options, forest_seed);
      cached_training = std::move(training);
    }
    std::vector<ParamConfig> candidates;
    candidates.reserve(ambs.n_candidates);
    for (std::size_t i = 0; i < ambs.n_candidates; ++i) candidates.push_back(sample_random(space, rng));
    // Best-scoring candidate that has not been dispatched yet.
    while (!candidates.empty()) {
      const auto i = acquire_lcb(*cached_model, space, candidates, ambs.kappa);
      if (!dispatched.contains(candidates[i].values)) return candidates[i];
      candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(i));
    }
    return random_unique(rng);
  };

  Channel<Job> jobs;
  Channel<Completion> completions;
  std::vector<std::thread> workers;
  workers.reserve(options.n_workers);
  for (std::size_t w = 0; w < options.n_workers; ++w) {
    workers.emplace_back([&, w] {
      while (auto job = jobs.pop()) {
        Completion c{job->sequence, EvalStatus::Failed, 0.0, 0.0, static_cast<int>(w), {}};
        const auto t0 = std::chrono::steady_clock::now();
        try {
          const double v = objective(job->config, job->seed);
          if (std::isfinite(v)) {
            c.status = EvalStatus::Done;
            c.objective = v;
          } else {
            c.error = "objective returned a non-finite value";
          }
        } catch (const std::exception& e) {
          c.error = e.what();
        } catch (...) {
          c.error = "unknown exception";
        }
        c.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        completions.push(std::move(c));
      }
    });
  }
  const auto shutdown = [&] {
    jobs.close();
    for (auto& t : workers) t.join();
  };

  std::size_t in_flight = 0;
  std::size_t dispatched_now = 0;
  bool stopping = false;
  const auto fill = [&] {
    bool any = false;
    while (!stopping && in_flight < options.n_workers) {
      if ((options.cancel && options.cancel->load()) ||
          (options.max_new_evaluations && dispatched_now >= *options.max_new_evaluations)) {
        stopping = true;
        break;
      }
      Job job;
      if (!redispatch.empty()) {
        job = std::move(redispatch.front());
        redispatch.pop_front();
        records[job.sequence].worker = -1;
      } else if (next_seq < options.budget && ready(next_seq)) {
        const auto seq = next_seq;
        job = {seq, propose(seq), objective_seed(options.seed, seq)};
        dispatched.insert(job.config.values);
        EvalRecord& r = records[seq];
        r = {};
        r.sequence = seq;
        r.config = job.config;
        r.seed = job.seed;
        ++next_seq;
      } else {
        break;
      }
      jobs.push(std::move(job));
      ++in_flight;
      ++dispatched_now;
      any = true;
    }
    if (any) checkpoint();
  };

  try {
    fill();
    while (in_flight > 0) {
      auto c = completions.pop();
      --in_flight;
      EvalRecord& r = records[c->sequence];
      r.status = c->status;
      r.objective = c->objective;
      r.wall_time_s = c->wall_time_s;
      r.worker = c->worker;
      r.error = std::move(c->error);
      if (csv.is_open()) {
        csv << results_csv_row(space, r) << '\n';
        csv.flush();
      }
      if (options.on_record) options.on_record(r);
      checkpoint();
      fill();
    }
  } catch (...) {
    shutdown();
    throw;
  }
  shutdown();
  checkpoint();

  SearchResult result;
  result.records.assign(records.begin(), records.begin() + static_cast<std::ptrdiff_t>(next_seq));
  result.complete = next_seq == options.budget &&
                    std::none_of(result.records.begin(), result.records.end(),
                                 [](const EvalRecord& r) { return r.status == EvalStatus::Pending; });
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const auto& r = result.records[i];
    if (r.status != EvalStatus::Done) continue;
    if (!result.best || r.objective > result.records[*result.best].objective) result.best = i;
  }
  return result;
}

}  // namespace spikeopt

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

#include "spikeopt.h"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "spikeopt/architectures.hpp"
#include "spikeopt/datasets.hpp"
#include "spikeopt/error.hpp"
#include "spikeopt/report.hpp"
#include "spikeopt/search.hpp"
#include "spikeopt/tasks.hpp"

using namespace spikeopt;

struct spk_dataset {
  Dataset data;
};

struct spk_config {
  Case kind;
  FlatConfig params;
};

struct spk_result {
  TaskResult result;
};

struct spk_search {
  Case kind;
  ParamSpace space;
  std::string bound_mode;
  SearchResult result;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_error_kind;
std::atomic<bool> g_cancel{false};

spk_status fail(spk_status status, std::string kind, std::string message) {
  g_error_kind = std::move(kind);
  g_error = std::move(message);
  return status;
}

template <class F>
spk_status guarded(F&& body) {
  try {
    body();
    return SPK_OK;
  } catch (const Error& e) {
    return fail(static_cast<spk_status>(exit_code_for(e.code())), errc_name(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SPK_ERR_INTERNAL, "Internal", "out of memory");
  } catch (const std::exception& e) {
    return fail(SPK_ERR_INTERNAL, "Internal", e.what());
  } catch (...) {
    return fail(SPK_ERR_INTERNAL, "Internal", "unknown exception");
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw Error(Errc::ConfigError, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  auto* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p == nullptr) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

TaskConfig to_task_config(const spk_task_settings& s) {
  TaskConfig t;
  t.n_learn_samples = s.learn_samples;
  t.n_eval_samples = s.eval_samples;
  t.steps_per_sample = s.steps_per_sample;
  if (s.eval_steps_per_sample != 0) t.eval_steps_per_sample = s.eval_steps_per_sample;
  t.inter_sample_reset = s.inter_sample_reset != 0;
  t.mode = s.unsupervised != 0 ? TaskMode::Unsupervised : TaskMode::Supervised;
  t.seed = s.seed;
  t.encoder_gain = s.encoder_gain;
  if (t.steps_per_sample == 0) throw Error(Errc::ConfigError, "steps per sample must be positive");
  if (!(t.encoder_gain > 0.0) || !std::isfinite(t.encoder_gain)) {
    throw Error(Errc::ConfigError, "encoder gain must be positive");
  }
  if (s.kenyon_cells == 0) throw Error(Errc::ConfigError, "kenyon cell count must be positive");
  return t;
}

// Validates the configuration by building it against the case's schema.
void check_params(Case c, const FlatConfig& params) {
  if (c == Case::Shallow) {
    validate(shallow_from(params));
  } else {
    validate(complex_from(params));
  }
}

FlatConfig default_params(Case c) {
  return c == Case::Shallow ? to_flat(reference_shallow()) : to_flat(reference_complex());
}

std::string bound_key(Case c) { return std::string(learned_prefix(c)) + ".bound_mode"; }

void put_task(FlatConfig& m, const spk_task_settings& s) {
  m.set("task.learn_samples", std::to_string(s.learn_samples));
  m.set("task.eval_samples", std::to_string(s.eval_samples));
  m.set("task.steps_per_sample", std::to_string(s.steps_per_sample));
  m.set("task.eval_steps_per_sample", std::to_string(s.eval_steps_per_sample));
  m.set("task.inter_sample_reset", std::to_string(s.inter_sample_reset));
  m.set("task.unsupervised", std::to_string(s.unsupervised));
  m.set("task.seed", std::to_string(s.seed));
  m.set("task.encoder_gain", format_double(s.encoder_gain));
  m.set("task.kenyon_cells", std::to_string(s.kenyon_cells));
}

void put_search(FlatConfig& m, const spk_search_settings& s) {
  m.set("search.workers", std::to_string(s.workers));
  m.set("search.n_trees", std::to_string(s.n_trees));
  m.set("search.min_leaf", std::to_string(s.min_leaf));
  m.set("search.init_random", std::to_string(s.init_random));
  m.set("search.n_candidates", std::to_string(s.n_candidates));
  m.set("search.kappa", format_double(s.kappa));
  m.set("search.fixed_lag", std::to_string(s.fixed_lag));
  m.set("search.stop_after", std::to_string(s.stop_after));
  m.set("search.random_only", std::to_string(s.random_only));
  m.set("search.bipolar", std::to_string(s.bipolar));
}

std::uint64_t get_u64(const FlatConfig& m, std::string_view key) {
  const auto& v = m.get(key);
  try {
    std::size_t used = 0;
    const auto x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::logic_error&) {
    throw Error(Errc::IoError, "checkpoint field " + std::string(key) + " = '" + v + "' is not an integer");
  }
}

double get_double(const FlatConfig& m, std::string_view key) {
  const auto& v = m.get(key);
  try {
    std::size_t used = 0;
    const auto x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::logic_error&) {
    throw Error(Errc::IoError, "checkpoint field " + std::string(key) + " = '" + v + "' is not a number");
  }
}

spk_task_settings get_task(const FlatConfig& m) {
  spk_task_settings s;
  s.learn_samples = get_u64(m, "task.learn_samples");
  s.eval_samples = get_u64(m, "task.eval_samples");
  s.steps_per_sample = static_cast<std::uint32_t>(get_u64(m, "task.steps_per_sample"));
  s.eval_steps_per_sample = static_cast<std::uint32_t>(get_u64(m, "task.eval_steps_per_sample"));
  s.inter_sample_reset = static_cast<int>(get_u64(m, "task.inter_sample_reset"));
  s.unsupervised = static_cast<int>(get_u64(m, "task.unsupervised"));
  s.seed = get_u64(m, "task.seed");
  s.encoder_gain = get_double(m, "task.encoder_gain");
  s.kenyon_cells = static_cast<std::uint32_t>(get_u64(m, "task.kenyon_cells"));
  return s;
}

spk_search_settings get_search(const FlatConfig& m) {
  spk_search_settings s;
  spk_search_settings_default(&s);
  s.workers = static_cast<std::uint32_t>(get_u64(m, "search.workers"));
  s.n_trees = static_cast<std::uint32_t>(get_u64(m, "search.n_trees"));
  s.min_leaf = static_cast<std::uint32_t>(get_u64(m, "search.min_leaf"));
  s.init_random = static_cast<std::uint32_t>(get_u64(m, "search.init_random"));
  s.n_candidates = static_cast<std::uint32_t>(get_u64(m, "search.n_candidates"));
  s.kappa = get_double(m, "search.kappa");
  s.fixed_lag = static_cast<std::uint32_t>(get_u64(m, "search.fixed_lag"));
  s.stop_after = get_u64(m, "search.stop_after");
  s.random_only = static_cast<int>(get_u64(m, "search.random_only"));
  s.bipolar = static_cast<int>(get_u64(m, "search.bipolar"));
  return s;
}

SearchOptions to_options(const spk_search_settings& s) {
  SearchOptions o;
  o.n_workers = s.workers;
  o.seed = s.seed;
  o.budget = s.budget;
  o.ambs.n_trees = s.n_trees;
  o.ambs.min_leaf = s.min_leaf;
  if (s.init_random != 0) o.ambs.init_random = s.init_random;
  o.ambs.n_candidates = s.n_candidates;
  o.ambs.kappa = s.kappa;
  if (s.fixed_lag != 0) o.ambs.fixed_lag = s.fixed_lag;
  if (s.stop_after != 0) o.max_new_evaluations = s.stop_after;
  o.random_only = s.random_only != 0;
  o.cancel = &g_cancel;
  return o;
}

void write_best(const std::filesystem::path& path, const spk_search& s) {
  const auto* best = s.result.best_record();
  if (best == nullptr) return;
  auto flat = s.space.to_flat(best->config);
  flat.set(bound_key(s.kind), s.bound_mode);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << "# case = " << case_name(s.kind) << "\n# sequence = " << best->sequence
      << "\n# objective = " << format_double(best->objective) << "\n"
      << flat.to_text();
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

std::unique_ptr<spk_search> execute(Case kind, const Dataset& data, const spk_task_settings& task_settings,
                                    const spk_search_settings& settings, const FlatConfig& metadata,
                                    const std::filesystem::path& out_dir, std::vector<EvalRecord> prior,
                                    spk_progress_fn progress, void* user) {
  const auto task = to_task_config(task_settings);
  if (task.mode == TaskMode::Unsupervised) {
    throw Error(Errc::ConfigError, "searches maximize accuracy and need the supervised task");
  }
  if (settings.workers == 0) throw Error(Errc::ConfigError, "workers must be at least 1");
  auto s = std::make_unique<spk_search>();
  s->kind = kind;
  s->space = design_space(kind);
  s->bound_mode = settings.bipolar != 0 ? "bipolar" : "unipolar";

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

  auto options = to_options(settings);
  options.results_csv = out_dir / "results.csv";
  options.checkpoint = out_dir / "checkpoint.json";
  options.metadata = metadata;
  if (progress != nullptr) {
    options.on_record = [progress, user](const EvalRecord& r) {
      progress(user, r.sequence, r.status == EvalStatus::Done ? 1 : 2, r.objective);
    };
  }
  const auto kenyon = task_settings.kenyon_cells;
  const auto& space = s->space;
  const auto bound = bound_key(kind);
  const auto bound_mode = s->bound_mode;
  const Objective objective = [&, kind, kenyon, task](const ParamConfig& config, std::uint64_t seed) {
    auto flat = space.to_flat(config);
    flat.set(bound, bound_mode);
    auto t = task;
    t.seed = seed;
    return evaluate_case(kind, flat, data, t, kenyon).accuracy;
  };
  s->result = run_search(s->space, objective, options, std::move(prior));
  write_best(out_dir / "best_config.txt", *s);
  return s;
}

}  // namespace

extern "C" {

const char* spk_last_error(void) { return g_error.c_str(); }
const char* spk_last_error_kind(void) { return g_error_kind.c_str(); }
const char* spk_version(void) { return "1.0.0"; }
void spk_string_free(char* s) { std::free(s); }

spk_status spk_dataset_load_mnist(const char* dir, spk_dataset** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    *out = new spk_dataset{load_mnist(dir)};
  });
}

spk_status spk_dataset_synthetic(uint32_t classes, uint32_t width, uint64_t samples, uint64_t eval_samples,
                                 double noise, uint64_t seed, spk_dataset** out) {
  return guarded([&] {
    require(out, "out");
    BlobOptions o;
    o.noise = noise;
    o.eval_samples = eval_samples;
    *out = new spk_dataset{synthetic_blobs(classes, width, samples, seed, o)};
  });
}

void spk_dataset_free(spk_dataset* d) { delete d; }
uint64_t spk_dataset_width(const spk_dataset* d) { return d ? d->data.width() : 0; }
uint64_t spk_dataset_classes(const spk_dataset* d) { return d ? d->data.n_classes() : 0; }
uint64_t spk_dataset_learn_pool(const spk_dataset* d) { return d ? d->data.pool_size(Split::Learn) : 0; }
uint64_t spk_dataset_eval_pool(const spk_dataset* d) { return d ? d->data.pool_size(Split::Eval) : 0; }
const char* spk_dataset_source(const spk_dataset* d) { return d ? d->data.source().c_str() : ""; }

void spk_task_settings_default(spk_task_settings* s) {
  if (s == nullptr) return;
  const TaskConfig t;
  s->learn_samples = t.n_learn_samples;
  s->eval_samples = t.n_eval_samples;
  s->steps_per_sample = static_cast<uint32_t>(t.steps_per_sample);
  s->eval_steps_per_sample = 0;
  s->inter_sample_reset = t.inter_sample_reset ? 1 : 0;
  s->unsupervised = 0;
  s->seed = t.seed;
  s->encoder_gain = t.encoder_gain;
  s->kenyon_cells = 5000;
}

spk_status spk_config_default(const char* case_name, spk_config** out) {
  return guarded([&] {
    require(case_name, "case");
    require(out, "out");
    const auto c = parse_case(case_name);
    *out = new spk_config{c, default_params(c)};
  });
}

spk_status spk_config_parse(const char* case_name, const char* text, spk_config** out) {
  return guarded([&] {
    require(case_name, "case");
    require(text, "text");
    require(out, "out");
    const auto c = parse_case(case_name);
    auto flat = FlatConfig::parse(text);
    check_params(c, flat);
    *out = new spk_config{c, std::move(flat)};
  });
}

spk_status spk_config_load(const char* case_name, const char* path, spk_config** out) {
  return guarded([&] {
    require(case_name, "case");
    require(path, "path");
    require(out, "out");
    const auto c = parse_case(case_name);
    auto flat = FlatConfig::load(path);
    check_params(c, flat);
    *out = new spk_config{c, std::move(flat)};
  });
}

spk_status spk_config_set(spk_config* c, const char* key, const char* value) {
  return guarded([&] {
    require(c, "config");
    require(key, "key");
    require(value, "value");
    auto next = c->params;
    next.set(key, value);
    check_params(c->kind, next);
    c->params = std::move(next);
  });
}

spk_status spk_config_to_text(const spk_config* c, char** out) {
  return guarded([&] {
    require(c, "config");
    require(out, "out");
    *out = dup_string(c->params.to_text());
  });
}

const char* spk_config_case(const spk_config* c) { return c ? case_name(c->kind) : ""; }
void spk_config_free(spk_config* c) { delete c; }

spk_status spk_evaluate(const spk_config* c, const spk_dataset* d, const spk_task_settings* s, spk_result** out) {
  return guarded([&] {
    require(c, "config");
    require(d, "dataset");
    require(s, "settings");
    require(out, "out");
    const auto task = to_task_config(*s);
    *out = new spk_result{evaluate_case(c->kind, c->params, d->data, task, s->kenyon_cells)};
  });
}

double spk_result_accuracy(const spk_result* r) { return r ? r->result.accuracy : NAN; }
double spk_result_metric(const spk_result* r) { return r ? r->result.metric : NAN; }
double spk_result_wall_time(const spk_result* r) { return r ? r->result.wall_time_s : NAN; }

spk_status spk_result_to_text(const spk_result* r, char** out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    *out = dup_string(to_flat(r->result).to_text());
  });
}

spk_status spk_result_confusion_csv(const spk_result* r, char** out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    *out = dup_string(confusion_csv(r->result));
  });
}

void spk_result_free(spk_result* r) { delete r; }

void spk_search_settings_default(spk_search_settings* s) {
  if (s == nullptr) return;
  const AmbsParams a;
  s->budget = 100;
  s->workers = 1;
  s->seed = 0;
  s->n_trees = static_cast<uint32_t>(a.n_trees);
  s->min_leaf = static_cast<uint32_t>(a.min_leaf);
  s->init_random = 0;
  s->n_candidates = static_cast<uint32_t>(a.n_candidates);
  s->kappa = a.kappa;
  s->fixed_lag = 0;
  s->stop_after = 0;
  s->random_only = 0;
  s->bipolar = 0;
}

spk_status spk_search_run(const char* case_name, const spk_dataset* d, const char* dataset_args,
                          const spk_task_settings* task, const spk_search_settings* settings, const char* out_dir,
                          spk_progress_fn progress, void* user, spk_search** out) {
  return guarded([&] {
    require(case_name, "case");
    require(d, "dataset");
    require(task, "task settings");
    require(settings, "search settings");
    require(out_dir, "out_dir");
    require(out, "out");
    const auto kind = parse_case(case_name);
    FlatConfig meta;
    meta.set("case", spikeopt::case_name(kind));
    meta.set("dataset", dataset_args ? dataset_args : "");
    put_task(meta, *task);
    put_search(meta, *settings);
    *out = execute(kind, d->data, *task, *settings, meta, out_dir, {}, progress, user).release();
  });
}

spk_status spk_search_resume(const char* out_dir, const spk_dataset* d, uint32_t workers, uint64_t stop_after,
                             spk_progress_fn progress, void* user, spk_search** out) {
  return guarded([&] {
    require(out_dir, "out_dir");
    require(d, "dataset");
    require(out, "out");
    const std::filesystem::path dir(out_dir);
    auto cp = load_checkpoint(dir / "checkpoint.json");
    const auto kind = parse_case(cp.metadata.get("case"));
    const auto space = design_space(kind);
    if (cp.dimensions.size() != space.size()) {
      throw Error(Errc::IoError, "checkpoint dimensions do not match the " + std::string(case_name(kind)) + " case");
    }
    for (std::size_t i = 0; i < space.size(); ++i) {
      if (cp.dimensions[i] != space.dimension(i).name) {
        throw Error(Errc::IoError, "checkpoint dimension '" + cp.dimensions[i] + "' does not match '" +
                                       space.dimension(i).name + "'");
      }
    }
    const auto task = get_task(cp.metadata);
    auto settings = get_search(cp.metadata);
    settings.budget = cp.budget;
    settings.seed = cp.seed;
    settings.stop_after = stop_after;
    if (workers != 0) settings.workers = workers;
    auto meta = cp.metadata;
    put_search(meta, settings);
    *out = execute(kind, d->data, task, settings, meta, dir, std::move(cp.records), progress, user).release();
  });
}

spk_status spk_checkpoint_get(const char* out_dir, const char* key, char** out) {
  return guarded([&] {
    require(out_dir, "out_dir");
    require(key, "key");
    require(out, "out");
    const auto cp = load_checkpoint(std::filesystem::path(out_dir) / "checkpoint.json");
    const auto v = cp.metadata.find(key);
    if (!v) throw Error(Errc::IoError, "checkpoint has no '" + std::string(key) + "' entry");
    *out = dup_string(*v);
  });
}

void spk_request_cancel(void) { g_cancel.store(true); }
void spk_clear_cancel(void) { g_cancel.store(false); }

uint64_t spk_search_records(const spk_search* s) { return s ? s->result.records.size() : 0; }
uint64_t spk_search_done(const spk_search* s) { return s ? s->result.count(EvalStatus::Done) : 0; }
uint64_t spk_search_failed(const spk_search* s) { return s ? s->result.count(EvalStatus::Failed) : 0; }
int spk_search_complete(const spk_search* s) { return s && s->result.complete ? 1 : 0; }

int spk_search_best(const spk_search* s, uint64_t* sequence, double* objective) {
  const auto* best = s ? s->result.best_record() : nullptr;
  if (best == nullptr) return 0;
  if (sequence) *sequence = best->sequence;
  if (objective) *objective = best->objective;
  return 1;
}

spk_status spk_search_best_config(const spk_search* s, spk_config** out) {
  return guarded([&] {
    require(s, "search");
    require(out, "out");
    const auto* best = s->result.best_record();
    if (best == nullptr) throw Error(Errc::ConfigError, "no successful evaluation to report");
    auto flat = s->space.to_flat(best->config);
    flat.set(bound_key(s->kind), s->bound_mode);
    *out = new spk_config{s->kind, std::move(flat)};
  });
}

void spk_search_free(spk_search* s) { delete s; }

spk_status spk_report(const char* results_csv, const char* out_dir) {
  return guarded([&] {
    require(results_csv, "results");
    require(out_dir, "out_dir");
    write_report(load_results_csv(results_csv), out_dir);
  });
}

}  // extern "C"

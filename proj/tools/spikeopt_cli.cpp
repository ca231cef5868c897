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

// Command-line front end. Talks to the library exclusively through the C API.

#include <csignal>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spikeopt.h"

namespace fs = std::filesystem;

namespace {

/// Thrown to leave main with a given exit code after printing a diagnostic.
struct Exit {
  int code;
};

void check(spk_status s) {
  if (s == SPK_OK) return;
  std::cerr << "error [" << spk_last_error_kind() << "]: " << spk_last_error() << "\n";
  throw Exit{static_cast<int>(s)};
}

[[noreturn]] void fail(int code, const std::string& message) {
  std::cerr << "error: " << message << "\n";
  throw Exit{code};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using DatasetPtr = std::unique_ptr<spk_dataset, Deleter<spk_dataset, spk_dataset_free>>;
using ConfigPtr = std::unique_ptr<spk_config, Deleter<spk_config, spk_config_free>>;
using ResultPtr = std::unique_ptr<spk_result, Deleter<spk_result, spk_result_free>>;
using SearchPtr = std::unique_ptr<spk_search, Deleter<spk_search, spk_search_free>>;

std::string take_string(char* s) {
  std::string out = s ? s : "";
  spk_string_free(s);
  return out;
}

std::string now_iso() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path default_out_dir() {
  if (const char* env = std::getenv("SPIKEOPT_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return "spikeopt-out";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(3, "cannot write " + path.string());
  out << text;
  if (!out) fail(3, "write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(3, "cannot create " + dir.string() + ": " + ec.message());
}

/// Ordered key = value manifest.
struct Manifest {
  std::vector<std::pair<std::string, std::string>> entries;
  void set(const std::string& k, const std::string& v) {
    for (auto& e : entries) {
      if (e.first == k) {
        e.second = v;
        return;
      }
    }
    entries.emplace_back(k, v);
  }
  std::string text() const {
    std::string s;
    for (const auto& [k, v] : entries) s += k + " = " + v + "\n";
    return s;
  }
};

std::map<std::string, std::string> read_flat(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(3, "cannot open " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    const auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) fail(2, path.string() + ":" + std::to_string(n) + ": expected 'key = value'");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

struct DatasetArgs {
  std::string spec = "synthetic";
  std::uint32_t classes = 10;
  std::uint32_t width = 784;
  double noise = 0.5;
  std::uint64_t seed = 0;
};

/// Loads "synthetic" (sized for the requested sample counts) or an MNIST
/// directory. Returns the dataset and a canonical description that reloads
/// the same data.
std::pair<DatasetPtr, std::string> load_dataset(const DatasetArgs& a, std::uint64_t learn, std::uint64_t eval) {
  spk_dataset* d = nullptr;
  if (a.spec == "synthetic" || a.spec.rfind("synthetic:", 0) == 0) {
    std::uint64_t samples = learn + eval;
    std::uint32_t classes = a.classes, width = a.width;
    std::uint64_t eval_pool = eval, seed = a.seed;
    double noise = a.noise;
    if (a.spec.size() > 10) {
      std::stringstream ss(a.spec.substr(10));
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) fail(2, "bad synthetic dataset option '" + item + "'");
        const auto k = item.substr(0, eq);
        const auto v = item.substr(eq + 1);
        try {
          if (k == "classes") classes = static_cast<std::uint32_t>(std::stoul(v));
          else if (k == "width") width = static_cast<std::uint32_t>(std::stoul(v));
          else if (k == "samples") samples = std::stoull(v);
          else if (k == "eval") eval_pool = std::stoull(v);
          else if (k == "noise") noise = std::stod(v);
          else if (k == "seed") seed = std::stoull(v);
          else fail(2, "unknown synthetic dataset option '" + k + "'");
        } catch (const std::logic_error&) {
          fail(2, "bad value for synthetic dataset option '" + k + "'");
        }
      }
    }
    check(spk_dataset_synthetic(classes, width, samples, eval_pool, noise, seed, &d));
    std::string canon = "synthetic:classes=" + std::to_string(classes) + ",width=" + std::to_string(width) +
                        ",samples=" + std::to_string(samples) + ",eval=" + std::to_string(eval_pool) +
                        ",noise=" + fmt(noise) + ",seed=" + std::to_string(seed);
    return {DatasetPtr(d), canon};
  }
  std::string dir = a.spec;
  if (dir.rfind("mnist:", 0) == 0) dir = dir.substr(6);
  check(spk_dataset_load_mnist(dir.c_str(), &d));
  return {DatasetPtr(d), "mnist:" + fs::absolute(dir).lexically_normal().string()};
}

void add_task_options(CLI::App& cmd, spk_task_settings& t, DatasetArgs& data) {
  cmd.add_option("--dataset", data.spec,
                 "'synthetic', 'synthetic:key=value,...' or an MNIST directory (optionally 'mnist:<dir>')");
  cmd.add_option("--samples,--learn-samples", t.learn_samples, "learning-stream samples")->capture_default_str();
  cmd.add_option("--eval-samples", t.eval_samples, "evaluation-stream samples")->capture_default_str();
  cmd.add_option("--steps", t.steps_per_sample, "time steps per sample")->capture_default_str();
  cmd.add_option("--eval-steps", t.eval_steps_per_sample, "time steps per evaluation sample (0: same as --steps)");
  cmd.add_option("--seed", t.seed, "seed for streams, encoder and network")->capture_default_str();
  cmd.add_option("--gain", t.encoder_gain, "Poisson encoder gain")->capture_default_str();
  cmd.add_option("--kenyon", t.kenyon_cells, "Kenyon cells in the complex case")->capture_default_str();
  cmd.add_flag_callback("--no-reset", [&t] { t.inter_sample_reset = 0; }, "keep neuron state between samples");
  cmd.add_flag("--unsupervised", t.unsupervised, "silent modulatory lines; report the l2 metric");
}

void put_task(Manifest& m, const spk_task_settings& t) {
  m.set("task.learn_samples", std::to_string(t.learn_samples));
  m.set("task.eval_samples", std::to_string(t.eval_samples));
  m.set("task.steps_per_sample", std::to_string(t.steps_per_sample));
  m.set("task.eval_steps_per_sample", std::to_string(t.eval_steps_per_sample));
  m.set("task.inter_sample_reset", std::to_string(t.inter_sample_reset));
  m.set("task.unsupervised", std::to_string(t.unsupervised));
  m.set("task.seed", std::to_string(t.seed));
  m.set("task.encoder_gain", fmt(t.encoder_gain));
  m.set("task.kenyon_cells", std::to_string(t.kenyon_cells));
}

spk_task_settings task_from_manifest(const std::map<std::string, std::string>& m) {
  spk_task_settings t;
  spk_task_settings_default(&t);
  const auto get = [&](const std::string& k) -> const std::string& {
    const auto it = m.find(k);
    if (it == m.end()) fail(2, "manifest lacks '" + k + "'");
    return it->second;
  };
  try {
    t.learn_samples = std::stoull(get("task.learn_samples"));
    t.eval_samples = std::stoull(get("task.eval_samples"));
    t.steps_per_sample = static_cast<std::uint32_t>(std::stoul(get("task.steps_per_sample")));
    t.eval_steps_per_sample = static_cast<std::uint32_t>(std::stoul(get("task.eval_steps_per_sample")));
    t.inter_sample_reset = std::stoi(get("task.inter_sample_reset"));
    t.unsupervised = std::stoi(get("task.unsupervised"));
    t.seed = std::stoull(get("task.seed"));
    t.encoder_gain = std::stod(get("task.encoder_gain"));
    t.kenyon_cells = static_cast<std::uint32_t>(std::stoul(get("task.kenyon_cells")));
  } catch (const std::logic_error&) {
    fail(2, "malformed task entry in manifest");
  }
  return t;
}

void base_manifest(Manifest& m, const std::string& command, int argc, char** argv) {
  std::string line;
  for (int i = 0; i < argc; ++i) line += (i ? " " : "") + std::string(argv[i]);
  m.set("command", command);
  m.set("argv", line);
  m.set("tool_version", spk_version());
  m.set("started_at", now_iso());
}

int cmd_eval(const std::string& case_name, const std::string& config_path, const std::string& manifest_path,
             spk_task_settings task, DatasetArgs data, const fs::path& out, int argc, char** argv) {
  std::string kind = case_name;
  std::optional<std::string> params_text;
  std::optional<std::string> dataset_override;
  if (!manifest_path.empty()) {
    const auto m = read_flat(manifest_path);
    if (!m.contains("case") || !m.contains("dataset")) fail(2, "manifest lacks 'case' or 'dataset'");
    kind = m.at("case");
    dataset_override = m.at("dataset");
    task = task_from_manifest(m);
    std::string text;
    for (const auto& [k, v] : m) {
      if (k.rfind("param.", 0) == 0) text += k.substr(6) + " = " + v + "\n";
    }
    params_text = text;
  }

  spk_config* raw = nullptr;
  if (params_text) {
    check(spk_config_parse(kind.c_str(), params_text->c_str(), &raw));
  } else if (!config_path.empty()) {
    check(spk_config_load(kind.c_str(), config_path.c_str(), &raw));
  } else {
    check(spk_config_default(kind.c_str(), &raw));
  }
  ConfigPtr config(raw);

  if (dataset_override) data.spec = *dataset_override;
  ensure_dir(out);
  Manifest m;
  base_manifest(m, "eval", argc, argv);
  m.set("case", spk_config_case(config.get()));
  // A manifest must identify the data before anything is loaded.
  m.set("dataset", data.spec);
  put_task(m, task);
  char* text = nullptr;
  check(spk_config_to_text(config.get(), &text));
  for (const auto& [k, v] : [&] {
         std::map<std::string, std::string> kv;
         std::stringstream ss(take_string(text));
         std::string line;
         while (std::getline(ss, line)) {
           const auto eq = line.find(" = ");
           if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
         }
         return kv;
       }()) {
    m.set("param." + k, v);
  }
  m.set("artifact.result", (out / "result.txt").string());
  m.set("artifact.confusion", (out / "confusion.csv").string());
  write_text(out / "manifest.txt", m.text());

  auto [dataset, canon] = load_dataset(data, task.learn_samples, task.eval_samples);
  m.set("dataset", canon);
  write_text(out / "manifest.txt", m.text());

  spk_result* r = nullptr;
  check(spk_evaluate(config.get(), dataset.get(), &task, &r));
  ResultPtr result(r);
  char* rt = nullptr;
  check(spk_result_to_text(result.get(), &rt));
  write_text(out / "result.txt", take_string(rt));
  char* ct = nullptr;
  check(spk_result_confusion_csv(result.get(), &ct));
  write_text(out / "confusion.csv", take_string(ct));
  m.set("finished_at", now_iso());
  write_text(out / "manifest.txt", m.text());

  if (task.unsupervised) {
    std::cout << "l2 metric " << fmt(spk_result_metric(result.get())) << "\n";
  } else {
    std::cout << "accuracy " << fmt(spk_result_accuracy(result.get())) << "\n";
  }
  return 0;
}

void on_progress(void* user, std::uint64_t sequence, int status, double objective) {
  auto* quiet = static_cast<bool*>(user);
  if (*quiet) return;
  if (status == 1) {
    std::cerr << "eval " << sequence << " done " << objective << "\n";
  } else {
    std::cerr << "eval " << sequence << " failed\n";
  }
}

void handle_sigint(int) { spk_request_cancel(); }

int cmd_search(const std::string& case_name, spk_task_settings task, DatasetArgs data,
               spk_search_settings settings, bool resume, bool quiet, const fs::path& out, int argc, char** argv) {
  ensure_dir(out);
  std::signal(SIGINT, handle_sigint);
  std::signal(SIGTERM, handle_sigint);
  spk_search* raw = nullptr;
  Manifest m;
  base_manifest(m, resume ? "search --resume" : "search", argc, argv);
  m.set("artifact.results", (out / "results.csv").string());
  m.set("artifact.checkpoint", (out / "checkpoint.json").string());
  m.set("artifact.best_config", (out / "best_config.txt").string());
  const auto manifest_path = out / (resume ? "manifest.resume.txt" : "manifest.txt");

  if (resume) {
    char* stored = nullptr;
    check(spk_checkpoint_get(out.string().c_str(), "dataset", &stored));
    data.spec = take_string(stored);
    char* kind = nullptr;
    check(spk_checkpoint_get(out.string().c_str(), "case", &kind));
    m.set("case", take_string(kind));
    m.set("dataset", data.spec);
    m.set("search.workers", std::to_string(settings.workers));
    m.set("search.stop_after", std::to_string(settings.stop_after));
    write_text(manifest_path, m.text());
    auto [dataset, canon] = load_dataset(data, 0, 0);
    check(spk_search_resume(out.string().c_str(), dataset.get(), settings.workers, settings.stop_after,
                            on_progress, &quiet, &raw));
  } else {
    m.set("case", case_name);
    m.set("dataset", data.spec);
    put_task(m, task);
    m.set("search.budget", std::to_string(settings.budget));
    m.set("search.workers", std::to_string(settings.workers));
    m.set("search.seed", std::to_string(settings.seed));
    m.set("search.n_trees", std::to_string(settings.n_trees));
    m.set("search.min_leaf", std::to_string(settings.min_leaf));
    m.set("search.init_random", std::to_string(settings.init_random));
    m.set("search.n_candidates", std::to_string(settings.n_candidates));
    m.set("search.kappa", fmt(settings.kappa));
    m.set("search.fixed_lag", std::to_string(settings.fixed_lag));
    m.set("search.stop_after", std::to_string(settings.stop_after));
    m.set("search.random_only", std::to_string(settings.random_only));
    m.set("search.bipolar", std::to_string(settings.bipolar));
    write_text(manifest_path, m.text());
    auto [dataset, canon] = load_dataset(data, task.learn_samples, task.eval_samples);
    m.set("dataset", canon);
    write_text(manifest_path, m.text());
    check(spk_search_run(case_name.c_str(), dataset.get(), canon.c_str(), &task, &settings, out.string().c_str(),
                         on_progress, &quiet, &raw));
  }
  SearchPtr search(raw);
  m.set("finished_at", now_iso());
  write_text(manifest_path, m.text());

  std::uint64_t seq = 0;
  double best = 0.0;
  std::cout << "records " << spk_search_records(search.get()) << " done " << spk_search_done(search.get())
            << " failed " << spk_search_failed(search.get()) << " complete "
            << (spk_search_complete(search.get()) ? "yes" : "no") << "\n";
  if (spk_search_best(search.get(), &seq, &best)) {
    std::cout << "best " << fmt(best) << " at sequence " << seq << "\n";
  }
  return 0;
}

int cmd_report(const std::string& results, const fs::path& out) {
  check(spk_report(results.c_str(), out.string().c_str()));
  std::cout << "report written to " << out.string() << "\n";
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Spiking-network simulation and asynchronous model-based search"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(spk_version()));

  spk_task_settings task;
  spk_task_settings_default(&task);
  DatasetArgs data;
  std::string kind = "shallow";
  std::string out_str;

  auto* eval = app.add_subcommand("eval", "learn over a sample stream, then evaluate with plasticity frozen");
  std::string config_path, manifest_path;
  eval->add_option("--case", kind, "shallow | complex")->capture_default_str();
  eval->add_option("--config", config_path, "flat key = value parameter file (default: built-in reference)");
  eval->add_option("--manifest", manifest_path, "re-run exactly what an earlier eval manifest describes");
  add_task_options(*eval, task, data);
  eval->add_option("--out", out_str, "output directory (default: $SPIKEOPT_OUT_DIR or ./spikeopt-out)");

  auto* search = app.add_subcommand("search", "asynchronous model-based search over the case's design space");
  spk_search_settings settings;
  spk_search_settings_default(&settings);
  bool resume = false;
  bool quiet = false;
  search->add_option("--case", kind, "shallow | complex")->capture_default_str();
  search->add_option("--budget", settings.budget, "total evaluations")->capture_default_str();
  search->add_option("--workers", settings.workers, "parallel evaluations")->capture_default_str();
  search->add_option("--search-seed", settings.seed, "seed of the search itself")->capture_default_str();
  search->add_option("--trees", settings.n_trees, "surrogate trees")->capture_default_str();
  search->add_option("--min-leaf", settings.min_leaf, "minimum samples per leaf")->capture_default_str();
  search->add_option("--init-random", settings.init_random, "random evaluations before the surrogate (0: auto)");
  search->add_option("--candidates", settings.n_candidates, "random candidates scored per proposal")
      ->capture_default_str();
  search->add_option("--kappa", settings.kappa, "exploration weight")->capture_default_str();
  search->add_option("--fixed-lag", settings.fixed_lag,
                     "train proposal k on records below k - lag (worker-count independent)");
  search->add_flag("--random-only", settings.random_only, "pure random search");
  search->add_flag("--bipolar", settings.bipolar, "bipolar weight bounds on the learned synapse");
  search->add_option("--stop-after", settings.stop_after, "stop dispatching after N new evaluations");
  search->add_flag("--resume", resume, "continue the search checkpointed in --out");
  search->add_flag("--quiet", quiet, "no per-evaluation progress on stderr");
  add_task_options(*search, task, data);
  search->add_option("--out", out_str, "output directory (default: $SPIKEOPT_OUT_DIR or ./spikeopt-out)");

  auto* report = app.add_subcommand("report", "scatter, histogram and best-so-far exports of a results CSV");
  std::string results;
  report->add_option("--results", results, "results CSV written by search")->required();
  report->add_option("--out", out_str, "output directory (default: $SPIKEOPT_OUT_DIR or ./spikeopt-out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  // The seed option is shared; the search seed defaults to it.
  if (search->parsed() && search->count("--search-seed") == 0) settings.seed = task.seed;
  const fs::path out = out_str.empty() ? default_out_dir() : fs::path(out_str);

  if (eval->parsed()) return cmd_eval(kind, config_path, manifest_path, task, data, out, argc, argv);
  if (search->parsed()) return cmd_search(kind, task, data, settings, resume, quiet, out, argc, argv);
  return cmd_report(results, out);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Exit& e) {
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}

#include "ccpca/analysis.hpp"
#include "ccpca/http_server.hpp"
#include "ccpca/service.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <pthread.h>

namespace {

using namespace ccpca;

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
  std::string input;
  std::string output;
  std::string labels;
  std::optional<double> eps;
  std::optional<int> min_pts;
  std::optional<double> filter_features;
  std::optional<double> filter_points;
  bool standardize = false;
  AnalysisOptions options;
  std::string agg = "max_abs";
};

void add_input_flags(CLI::App& cmd, CommonFlags& f) {
  cmd.add_option("--input", f.input, "Dataset bundle (.json) or table (.csv/.tsv)")->required();
  cmd.add_option("--output", f.output, "Output file (default: standard output)");
  cmd.add_option("--labels", f.labels, "Cluster labels file: JSON array or whitespace-separated integers");
  cmd.add_option("--eps", f.eps, "DBSCAN radius on coords2d");
  cmd.add_option("--min-pts", f.min_pts, "DBSCAN minimum neighborhood size (default 5)");
  cmd.add_option("--filter-features", f.filter_features, "Drop features with missing fraction above this");
  cmd.add_option("--filter-points", f.filter_points, "Drop points with missing fraction above this");
  cmd.add_flag("--standardize", f.standardize, "Z-score every feature before analysis");
  cmd.add_option("--threads", f.options.threads, "Worker threads for the alpha scan")
      ->capture_default_str()
      ->check(CLI::Range(1u, 1024u));
}

void add_alpha_flags(CLI::App& cmd, CommonFlags& f) {
  cmd.add_option("--gamma", f.options.gamma, "Minimum variance ratio for an alpha candidate")
      ->capture_default_str();
  cmd.add_option("--q", f.options.q, "Number of alpha candidates, including 0")->capture_default_str();
  cmd.add_option("--alpha-min", f.options.alpha_min, "Smallest positive alpha")->capture_default_str();
  cmd.add_option("--alpha-max", f.options.alpha_max, "Largest alpha")->capture_default_str();
}

std::vector<int> read_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read labels file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  std::vector<int> labels;
  if (first != std::string::npos && text[first] == '[') {
    try {
      for (const auto& v : Json::parse(text)) {
        labels.push_back(v.is_string() ? parse_cluster_ref(v.get<std::string>()) : v.get<int>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("malformed labels file: ") + e.what());
    }
    return labels;
  }
  std::istringstream tokens(text);
  for (std::string token; tokens >> token;) labels.push_back(parse_cluster_ref(token));
  return labels;
}

EmbeddedDataset load_input(const std::string& path) {
  const std::filesystem::path p(path);
  const auto ext = p.extension().string();
  if (ext == ".csv" || ext == ".tsv") {
    EmbeddedDataset ds;
    ds.table = load_table(p, TableFormat::csv);
    return ds;
  }
  return load_bundle(p);
}

/// Resolves flags into options and a dataset ready for analyze().
EmbeddedDataset prepare(CommonFlags& f) {
  auto dataset = load_input(f.input);
  if (!f.labels.empty()) {
    dataset.labels = compact_labels(read_labels(f.labels));
    dataset.validate();
  }
  if (f.eps || f.min_pts) {
    if (!f.eps) throw InputError("--min-pts requires --eps");
    if (!f.labels.empty()) throw InputError("--labels and DBSCAN flags are mutually exclusive");
    ClusterParams params{*f.eps, f.min_pts.value_or(5)};
    params.validate();
    f.options.clustering = params;
  }
  if (f.filter_features || f.filter_points) {
    f.options.filter = MissingFilter{f.filter_features.value_or(1.0), f.filter_points.value_or(1.0)};
  }
  f.options.standardize = f.standardize;
  f.options.aggregation = parse_aggregation_mode(f.agg);
  alpha_grid(f.options.q, f.options.alpha_min, f.options.alpha_max);
  return dataset;
}

void emit(const std::string& output, const Json& doc) {
  const auto text = doc.dump(2) + "\n";
  if (output.empty() || output == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(output, std::ios::binary);
  if (!out) throw InputError("cannot write output file: " + output);
  out << text;
}

int run_analyze(CommonFlags& f) {
  auto dataset = prepare(f);
  const auto result = analyze(std::move(dataset), f.options);
  emit(f.output, to_json(result, f.options));
  return 0;
}

int run_alpha_scan(CommonFlags& f, const std::string& cluster) {
  auto dataset = prepare(f);
  dataset = preprocess(std::move(dataset), f.options);
  if (f.options.clustering) dataset.labels = dbscan(dataset.coords2d, *f.options.clustering);
  if (!dataset.has_labels()) throw InputError("dataset has no labels; pass --labels or --eps");
  const int cluster_id = parse_cluster_ref(cluster);
  const auto grid = alpha_grid(f.options.q, f.options.alpha_min, f.options.alpha_max);
  const auto scan = select_alpha(dataset, cluster_id, grid, f.options.gamma, f.options.threads);
  Json doc = to_json(scan);
  doc["cluster"] = cluster_id;
  doc["name"] = cluster_name(cluster_id);
  emit(f.output, doc);
  return 0;
}

int run_serve(const std::string& host, int port, const std::string& dataset_dir) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ServerConfig config;
  config.host = host;
  config.port = port;
  config.dataset_dir = dataset_dir;
  HttpServer server(config);
  const int bound = server.bind();
  std::cerr << "ccpca " << kVersion << " listening on http://" << host << ":" << bound << std::endl;

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.run();
  // Wake the waiter when the server ends on its own.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contrastive PCA cluster explanation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  CommonFlags analyze_flags;
  auto* analyze_cmd = app.add_subcommand("analyze", "Run the full pipeline and print the analysis JSON");
  add_input_flags(*analyze_cmd, analyze_flags);
  add_alpha_flags(*analyze_cmd, analyze_flags);
  analyze_cmd->add_option("--delta", analyze_flags.options.delta, "Maximum number of heatmap rows")
      ->capture_default_str();
  analyze_cmd->add_option("--agg", analyze_flags.agg, "Row aggregation")
      ->check(CLI::IsMember({"max_abs", "mean"}))
      ->capture_default_str();
  analyze_cmd->add_option("--top-k", analyze_flags.options.top_k, "Top features per cluster")
      ->capture_default_str();

  CommonFlags scan_flags;
  std::string scan_cluster;
  auto* scan_cmd = app.add_subcommand("alpha-scan", "Print the alpha candidates of one cluster");
  add_input_flags(*scan_cmd, scan_flags);
  add_alpha_flags(*scan_cmd, scan_flags);
  scan_cmd->add_option("--cluster", scan_cluster, "Cluster id, or Z for noise")->required();

  std::string host = "127.0.0.1";
  int port = 8765;
  std::string dataset_dir;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the session API over HTTP");
  serve_cmd->add_option("--host", host, "Listen address")->capture_default_str();
  serve_cmd->add_option("--port", port, "Listen port (0 picks a free one)")->capture_default_str();
  serve_cmd->add_option("--dataset-dir", dataset_dir, "Directory of bundles sessions may open by name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*analyze_cmd) return run_analyze(analyze_flags);
    if (*scan_cmd) return run_alpha_scan(scan_flags, scan_cluster);
    if (*serve_cmd) return run_serve(host, port, dataset_dir);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitInput;
}

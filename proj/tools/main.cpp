// elasticmesh CLI: generate test images, run the mesh relaxation pipeline,
// and run the k-means baseline.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "elasticmesh/elasticmesh.hpp"

namespace em = elasticmesh;
namespace fs = std::filesystem;

namespace {

constexpr int kExitParseError = 1;
constexpr int kExitInstability = 2;
constexpr int kExitBadFlags = 3;

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

int worker_count() {
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (workers > 8) workers = 8;
  if (const char* cap = std::getenv("ELASTICMESH_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(cap, &end, 10);
    if (end != cap && *end == '\0' && parsed >= 1) {
      workers = std::min(workers, static_cast<int>(std::min(parsed, 64L)));
    }
  }
  return workers;
}

struct SizeArg {
  int w = 64;
  int h = 64;
};

SizeArg parse_size(const std::string& text) {
  SizeArg size;
  char sep = 0;
  std::istringstream in(text);
  if (!(in >> size.w >> sep >> size.h) || (sep != 'x' && sep != 'X') || !in.eof()) {
    throw CLI::ValidationError("--size", "expected WxH, e.g. 64x64");
  }
  return size;
}

std::vector<double> parse_levels(const std::string& text, std::size_t expected,
                                 const char* variant) {
  std::vector<double> levels;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      levels.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--levels", "expected comma-separated numbers");
    }
  }
  if (levels.size() != expected) {
    throw CLI::ValidationError("--levels", std::string(variant) + " takes " +
                                               std::to_string(expected) + " levels");
  }
  return levels;
}

std::set<int> parse_snapshots(const std::string& text) {
  std::set<int> snapshots;
  if (text.empty() || text == "none") return snapshots;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      const int iteration = std::stoi(item);
      if (iteration < 1) throw std::invalid_argument("nonpositive");
      snapshots.insert(iteration);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--snapshots",
                                 "expected comma-separated positive iteration numbers");
    }
  }
  return snapshots;
}

struct SegmentArgs {
  std::string input;
  std::string out_dir;
  double k1 = 1.0;
  double k2 = 1.0;
  double k3 = 0.1;
  double epsilon = 1e-4;
  int max_iterations = 10000;
  std::string snapshots = "5,10,20,40,80";
  double zero_tolerance = 1e-9;
  int merge_target = 0;  // 0 = no merging
};

void write_summary(const std::vector<std::pair<std::string, std::string>>& entries,
                   const fs::path& out_dir) {
  std::string text;
  for (const auto& [key, value] : entries) text += key + "=" + value + "\n";
  std::cout << text;
  em::write_text_file(text, out_dir / "summary.txt");
}

int run_segment(const SegmentArgs& args) {
  const em::StabilityCheck stability = em::check_stability(args.k2, args.k3);
  if (!stability.ok) {
    std::cerr << "elasticmesh: " << stability.message << "\n";
    return kExitInstability;
  }
  const em::SimParams params(args.k1, args.k2, args.k3, args.epsilon, args.max_iterations);
  const std::set<int> snapshots = parse_snapshots(args.snapshots);

  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);

  std::string config;
  config += "input=" + args.input + "\n";
  config += "out=" + args.out_dir + "\n";
  config += "k1=" + format_value(args.k1) + "\n";
  config += "k2=" + format_value(args.k2) + "\n";
  config += "k3=" + format_value(args.k3) + "\n";
  config += "eps=" + format_value(args.epsilon) + "\n";
  config += "max_iter=" + std::to_string(args.max_iterations) + "\n";
  config += "snapshots=" + args.snapshots + "\n";
  config += "zero_tol=" + format_value(args.zero_tolerance) + "\n";
  config += "merge_to=" + (args.merge_target > 0 ? std::to_string(args.merge_target)
                                                 : std::string("none")) + "\n";
  em::write_text_file(config, out_dir / "config.txt");

  const em::Grid grid = em::read_pgm_file(args.input);
  const em::SimulationResult sim = em::simulate(grid, params, snapshots, worker_count());

  const em::SignMap signs = em::sign_map(sim.heights, args.zero_tolerance);
  const em::LabelMap labels = em::cluster_regions(signs);

  em::write_pgm_file(em::render_sign_map(signs), out_dir / "sign.pgm");
  for (const auto& [iteration, heights] : sim.snapshots) {
    const em::SignMap snapshot_signs = em::sign_map(heights, args.zero_tolerance);
    em::write_pgm_file(em::render_sign_map(snapshot_signs),
                       out_dir / ("sign_iter" + std::to_string(iteration) + ".pgm"));
  }
  em::write_text_file(em::write_labels_csv(labels), out_dir / "labels.csv");
  em::write_pgm_file(em::render_labels(labels), out_dir / "labels_render.pgm");
  em::write_text_file(em::export_heightmap_csv(sim.heights), out_dir / "heights.csv");
  em::write_text_file(em::write_convergence_csv(sim.trace), out_dir / "convergence.csv");
  const bool obj_exportable = grid.width() >= 2 && grid.height() >= 2;
  if (obj_exportable) {
    em::write_text_file(em::export_mesh_obj(sim.heights), out_dir / "mesh.obj");
  }

  std::vector<std::pair<std::string, std::string>> summary;
  summary.emplace_back("input", args.input);
  summary.emplace_back("width", std::to_string(grid.width()));
  summary.emplace_back("height", std::to_string(grid.height()));
  summary.emplace_back("iterations", std::to_string(sim.iterations_run));
  summary.emplace_back("converged", sim.converged ? "true" : "false");
  summary.emplace_back("avg_abs_dz_final",
                       format_value(sim.trace.empty() ? 0.0 : sim.trace.back().avg_abs_dz));
  summary.emplace_back("regions", std::to_string(labels.region_count));

  if (args.merge_target > 0) {
    const em::MergeResult merged = em::merge_to_count(labels, grid, args.merge_target);
    em::write_pgm_file(em::render_labels(merged.labels), out_dir / "merged_render.pgm");
    em::write_text_file(em::write_merge_plan_csv(merged.plan), out_dir / "merge_plan.csv");
    summary.emplace_back("merge_target", std::to_string(args.merge_target));
    summary.emplace_back("regions_merged", std::to_string(merged.labels.region_count));
  }
  if (!obj_exportable) summary.emplace_back("mesh_obj", "skipped_degenerate_size");
  summary.emplace_back("out", args.out_dir);
  write_summary(summary, out_dir);
  return 0;
}

struct GenTestArgs {
  std::string variant;
  std::string size = "64x64";
  std::string levels;  // empty = variant default
  std::string out;     // empty = <variant>.pgm
  bool ascii = false;
};

int run_gen_test(const GenTestArgs& args) {
  const SizeArg size = parse_size(args.size);
  if (size.w < 8 || size.h < 8) {
    throw CLI::ValidationError("--size", "test patterns need at least 8x8 pixels");
  }

  em::Grid grid(1, 1, 0.0);
  std::string levels_used;
  if (args.variant == "halves") {
    levels_used = args.levels.empty() ? "180,60" : args.levels;
    const auto levels = parse_levels(levels_used, 2, "halves");
    grid = em::gen_halves(size.w, size.h, levels[0], levels[1]);
  } else if (args.variant == "rect") {
    levels_used = args.levels.empty() ? "60,180" : args.levels;
    const auto levels = parse_levels(levels_used, 2, "rect");
    grid = em::gen_rect(size.w, size.h, em::centered_rect(size.w, size.h), levels[0],
                        levels[1]);
  } else if (args.variant == "shapes") {
    levels_used = args.levels.empty() ? "200,60,100,140" : args.levels;
    const auto levels = parse_levels(levels_used, 4, "shapes");
    grid = em::gen_shapes(size.w, size.h, levels[0], levels[1], levels[2], levels[3]);
  } else {
    throw CLI::ValidationError("variant", "expected halves, rect or shapes");
  }

  const std::string out_path = args.out.empty() ? args.variant + ".pgm" : args.out;
  em::write_pgm_file(grid, out_path, !args.ascii);

  std::cout << "variant=" << args.variant << "\n"
            << "width=" << grid.width() << "\n"
            << "height=" << grid.height() << "\n"
            << "levels=" << levels_used << "\n"
            << "out=" << out_path << "\n";
  return 0;
}

struct KMeansArgs {
  std::string input;
  std::string out_dir;
  int k = 2;
  int max_iterations = 100;
  std::uint64_t seed = 0;
};

int run_kmeans(const KMeansArgs& args) {
  const em::Grid grid = em::read_pgm_file(args.input);
  const em::KMeansResult result = em::kmeans_grayscale(grid, args.k, args.max_iterations,
                                                       args.seed);
  const em::LabelMap components = em::split_components(result.assignment);

  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);
  em::write_pgm_file(em::render_labels(result.assignment), out_dir / "classes_render.pgm");
  em::write_pgm_file(em::render_labels(components), out_dir / "components_render.pgm");

  std::vector<std::int64_t> class_counts(static_cast<std::size_t>(args.k), 0);
  for (auto label : result.assignment.labels.values()) {
    ++class_counts[static_cast<std::size_t>(label)];
  }

  std::vector<std::pair<std::string, std::string>> summary;
  summary.emplace_back("input", args.input);
  summary.emplace_back("k", std::to_string(args.k));
  summary.emplace_back("iterations", std::to_string(result.iterations));
  summary.emplace_back("converged", result.converged ? "true" : "false");
  for (std::size_t c = 0; c < result.centroids.size(); ++c) {
    summary.emplace_back("centroid_" + std::to_string(c), format_value(result.centroids[c]));
    summary.emplace_back("class_count_" + std::to_string(c),
                         std::to_string(class_counts[c]));
  }
  summary.emplace_back("components", std::to_string(components.region_count));
  summary.emplace_back("out", args.out_dir);
  write_summary(summary, out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-balancing elastic-mesh image segmentation"};
  app.require_subcommand(1);

  SegmentArgs segment_args;
  CLI::App* segment = app.add_subcommand(
      "segment", "Relax the mesh on a PGM image, cluster signed regions, export artifacts");
  segment->add_option("input", segment_args.input, "input PGM (P2 or P5, maxval 255)")
      ->required()
      ->check(CLI::ExistingFile);
  segment->add_option("--out", segment_args.out_dir, "output directory")->required();
  segment->add_option("--k1", segment_args.k1, "repulsion coefficient")
      ->check(CLI::PositiveNumber);
  segment->add_option("--k2", segment_args.k2, "elasticity coefficient")
      ->check(CLI::PositiveNumber);
  segment->add_option("--k3", segment_args.k3, "step gain")->check(CLI::PositiveNumber);
  segment->add_option("--eps", segment_args.epsilon, "stop threshold on avg |dz|")
      ->check(CLI::PositiveNumber);
  segment->add_option("--max-iter", segment_args.max_iterations, "iteration cap")
      ->check(CLI::PositiveNumber);
  segment->add_option("--snapshots", segment_args.snapshots,
                      "comma-separated iterations for sign snapshots, or 'none'");
  segment->add_option("--zero-tol", segment_args.zero_tolerance,
                      "|z| at or below this counts as undecided sign")
      ->check(CLI::NonNegativeNumber);
  segment->add_option("--merge-to", segment_args.merge_target,
                      "greedily merge regions down to this count")
      ->check(CLI::PositiveNumber);

  GenTestArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen-test", "Generate a synthetic test image");
  gen->add_option("variant", gen_args.variant, "halves, rect or shapes")->required();
  gen->add_option("--size", gen_args.size, "image size WxH (default 64x64)");
  gen->add_option("--levels", gen_args.levels,
                  "comma-separated greyscale levels (halves: left,right; rect: "
                  "rect,background; shapes: background,circle,triangle,rectangle)");
  gen->add_option("--out,-o", gen_args.out, "output PGM path (default <variant>.pgm)");
  gen->add_flag("--ascii", gen_args.ascii, "write ascii P2 instead of binary P5");

  KMeansArgs kmeans_args;
  CLI::App* kmeans = app.add_subcommand("kmeans", "k-means greyscale baseline");
  kmeans->add_option("input", kmeans_args.input, "input PGM")
      ->required()
      ->check(CLI::ExistingFile);
  kmeans->add_option("--k", kmeans_args.k, "cluster count")
      ->required()
      ->check(CLI::PositiveNumber);
  kmeans->add_option("--max-iter", kmeans_args.max_iterations, "iteration cap")
      ->check(CLI::PositiveNumber);
  kmeans->add_option("--seed", kmeans_args.seed, "reserved for randomized initialization");
  kmeans->add_option("--out", kmeans_args.out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
    if (segment->parsed()) return run_segment(segment_args);
    if (gen->parsed()) return run_gen_test(gen_args);
    if (kmeans->parsed()) return run_kmeans(kmeans_args);
    return kExitBadFlags;
  } catch (const CLI::ParseError& error) {
    app.exit(error);
    return kExitBadFlags;
  } catch (const em::ParseError& error) {
    std::cerr << "elasticmesh: input parse error: " << error.what() << "\n";
    return kExitParseError;
  } catch (const em::InstabilityError& error) {
    std::cerr << "elasticmesh: " << error.what() << "\n";
    return kExitInstability;
  } catch (const std::exception& error) {
    std::cerr << "elasticmesh: " << error.what() << "\n";
    return kExitBadFlags;
  }
}

// Minimal end-to-end use of the library: generate a test image, relax the
// mesh to balance, cluster the sign distribution, merge, and export artifacts.

#include <filesystem>
#include <iostream>

#include "elasticmesh/elasticmesh.hpp"

namespace em = elasticmesh;

int main() {
  const em::Grid image = em::gen_shapes(64, 64);

  em::SimParams params;
  params.epsilon = 1e-6;
  params.max_iterations = 500000;
  const em::SimulationResult sim = em::simulate(image, params, {5, 20, 80});

  const em::SignMap signs = em::sign_map(sim.heights);
  const em::LabelMap regions = em::cluster_regions(signs);
  const em::MergeResult merged = em::merge_to_count(regions, image, 2);

  std::cout << "iterations: " << sim.iterations_run
            << (sim.converged ? " (converged)" : " (hit the cap)") << "\n"
            << "regions: " << regions.region_count << "\n"
            << "after merging: " << merged.labels.region_count << "\n";
  for (const em::MergeEvent& event : merged.plan) {
    std::cout << "  merged region " << event.absorbed << " into " << event.survivor
              << " (mean diff " << event.mean_diff << ")\n";
  }

  const std::filesystem::path out = "demo_out";
  std::filesystem::create_directories(out);
  em::write_pgm_file(image, out / "input.pgm");
  em::write_pgm_file(em::render_sign_map(signs), out / "sign.pgm");
  em::write_pgm_file(em::render_labels(regions), out / "regions.pgm");
  em::write_pgm_file(em::render_labels(merged.labels), out / "merged.pgm");
  em::write_text_file(em::export_mesh_obj(sim.heights), out / "mesh.obj");
  em::write_text_file(em::write_convergence_csv(sim.trace), out / "convergence.csv");
  std::cout << "artifacts in " << out.string() << "/\n";
  return 0;
}

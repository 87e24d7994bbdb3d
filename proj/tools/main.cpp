#include "oline/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

int main(int argc, char** argv) {
  CLI::App app{"Oriented-line optics: ray families, symplectic checks, Fermat paths"};
  app.require_subcommand(1);

  std::string scene_path;
  std::string out_dir = ".";
  oline::cli::Overrides overrides;
  int grid = 0;
  double tol = 0.0, step = 0.0;
  std::uint64_t seed = 0;

  const std::map<std::string, std::string> about = {
      {"trace", "propagate the family through the system, one CSV row per ray"},
      {"defect", "defect grids before and after the system, with a rectangularity verdict"},
      {"check-symplectic", "chart Jacobian test of every interface at sampled lines"},
      {"wavefront", "reconstruct the surface orthogonal to the outgoing family"},
      {"mirror", "design a focusing mirror and verify that it focuses"},
      {"characteristic", "stationary optical length between endpoint1 and endpoint2"},
  };
  for (const auto& name : oline::cli::commands()) {
    auto* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--scene", scene_path, "scene file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--grid", grid, "grid resolution per axis (>= 3)");
    sub->add_option("--tol", tol, "verdict tolerance");
    sub->add_option("--step", step, "finite-difference step");
    sub->add_option("--seed", seed, "sampling seed");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? oline::cli::exit_ok : oline::cli::exit_scene_error;
  }

  const auto* sub = app.get_subcommands().front();
  if (sub->count("--grid")) overrides.grid = grid;
  if (sub->count("--tol")) overrides.tol = tol;
  if (sub->count("--step")) overrides.step = step;
  if (sub->count("--seed")) overrides.seed = seed;

  std::ifstream in(scene_path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read " << scene_path << '\n';
    return oline::cli::exit_scene_error;
  }
  std::ostringstream text;
  text << in.rdbuf();
  const int code = oline::cli::run(sub->get_name(), std::string_view(text.str()), overrides, out_dir, std::cerr);
  if (code == oline::cli::exit_ok) std::cout << sub->get_name() << ": wrote outputs to " << out_dir << '\n';
  return code;
}

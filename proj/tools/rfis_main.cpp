#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rfis/rfis.hpp"

namespace {

int run(const std::string& cmd, const std::string& config_path, const std::string& out_override,
        bool chaos) {
  try {
    const rfis::RunConfig cfg = rfis::load_config(config_path);
    std::filesystem::path out = out_override.empty()
                                    ? std::filesystem::path(config_path).parent_path() /
                                          cfg.outputs.dir
                                    : std::filesystem::path(out_override);
    nlohmann::json summary;
    if (cmd == "build")
      summary = rfis::cmd_build(cfg, out);
    else if (cmd == "verify")
      summary = rfis::cmd_verify(cfg, out);
    else if (cmd == "render")
      summary = rfis::cmd_render(cfg, out, chaos);
    else
      summary = rfis::cmd_dim(cfg, out);
    std::cout << summary.dump(2) << '\n';
    return 0;
  } catch (const rfis::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return rfis::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"recurrent fractal interpolation surfaces"};
  app.require_subcommand(1);

  std::string config_path, out_override;
  bool chaos = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_override, "output directory (overrides config outputs.dir)");
  };

  CLI::App* build = app.add_subcommand("build", "assemble the system and report its shape");
  add_common(build);
  CLI::App* verify =
      app.add_subcommand("verify", "matching/corner/variation checks as machine-readable JSON");
  add_common(verify);
  CLI::App* render = app.add_subcommand("render", "deterministic raster (or seeded point cloud)");
  add_common(render);
  render->add_flag("--chaos", chaos, "render a chaos-game point cloud instead of the raster");
  CLI::App* dim = app.add_subcommand("dim", "spectral dimension bounds + box-count regression");
  add_common(dim);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);  // prints usage/help
    return rc == 0 ? 0 : 2;     // --help is a success; bad arguments are validation errors
  }

  for (const auto* sub : {build, verify, render, dim})
    if (sub->parsed()) return run(sub->get_name(), config_path, out_override, chaos);
  return 2;
}

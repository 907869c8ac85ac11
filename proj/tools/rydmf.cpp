// rydmf: command-line front end, one subcommand per protocol.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "rydmf/config.hpp"
#include "rydmf/runner.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw rydmf::ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct Common {
  std::string config;
  std::string out = "out";
  rydmf::FlagOverrides flags;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON configuration file");
  sub->add_option("--out", c.out, "output directory")->capture_default_str();
  sub->add_option("--omega", c.flags.omega, "Rabi frequency (gamma)");
  sub->add_option("--delta0", c.flags.delta0, "static detuning (gamma)");
  sub->add_option("--vbar", c.flags.vbar, "mean-field interaction shift (gamma)");
  sub->add_option("--drive-period", c.flags.drive_period, "kick period (1/gamma)");
  sub->add_option("--kick-amp", c.flags.kick_amp, "kick amplitude (gamma)");
  sub->add_option("--kick-tau", c.flags.kick_tau, "kick duration (1/gamma)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven-dissipative Rydberg mean-field simulator"};
  app.set_version_flag("--version", rydmf::kVersion);
  app.require_subcommand(1);

  Common common;
  std::vector<std::pair<CLI::App*, rydmf::Protocol>> subs;
  for (const auto& [proto, name] : rydmf::protocol_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " protocol");
    add_common(sub, common);
    subs.emplace_back(sub, proto);
  }

  CLI11_PARSE(app, argc, argv);

  rydmf::Protocol protocol{};
  for (const auto& [sub, proto] : subs)
    if (sub->parsed()) protocol = proto;

  try {
    const std::string text = common.config.empty() ? std::string{} : read_file(common.config);
    const auto cfg = rydmf::parse_config(text, protocol, common.flags);
    const auto outcome = rydmf::run(cfg, common.out);
    for (const auto& f : outcome.files) std::cout << (std::filesystem::path(common.out) / f).string() << '\n';
    std::cout << (std::filesystem::path(common.out) / "manifest.json").string() << '\n';
    return outcome.exit_code;
  } catch (const rydmf::ConfigError& e) {
    std::cerr << "rydmf: config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "rydmf: " << e.what() << '\n';
    return 1;
  }
}

// Command-line front end: config interpretation, scenario orchestration,
// output emission. The binary in tools/ is a thin wrapper around run().
#ifndef PLFEM_CLI_HPP
#define PLFEM_CLI_HPP

#include <cstdint>
#include <memory>
#include <string>

#include "plfem/config.hpp"
#include "plfem/evolve.hpp"
#include "plfem/solver.hpp"

namespace plfem::cli {

struct CommonOptions {
    std::string config_path;
    std::string out_dir = "out";
    int threads = 1;
    std::uint64_t seed = 0;
};

// Exit codes: 0 success, 1 configuration error, 2 solver or check failure.
int run(int argc, const char* const* argv);

// Building blocks, exposed for in-process testing.
std::shared_ptr<const Mesh> mesh_from_config(const Config& cfg);
CoefficientSet coeffs_from_config(const Config& cfg);
SolverOptions solver_options_from_config(const Config& cfg);
MassMode mass_mode_from_config(const Config& cfg);

int cmd_solve_elliptic(const Config& cfg, const CommonOptions& opts);
int cmd_solve_parabolic(const Config& cfg, const CommonOptions& opts);
int cmd_check_coefficients(const Config& cfg, const CommonOptions& opts);
int cmd_study(const Config& cfg, const CommonOptions& opts);
int cmd_export_mesh(const Config& cfg, const CommonOptions& opts);

} // namespace plfem::cli

#endif

#ifndef ISOMONO_SPECIO_HPP
#define ISOMONO_SPECIO_HPP

#include "isomono/pfaffian.hpp"
#include "isomono/flow.hpp"
#include <iosfwd>
#include <string>

namespace isomono {

// External system-spec document (JSON; complex numbers as [re, im] pairs).
struct SystemSpec {
    std::vector<int> partition;
    std::vector<Complex> lambda;
    Matrix A;
    std::optional<Matrix> T, J;
    std::string dspec_kind = "zero";        // zero | explicit | 3d-example
    std::vector<Matrix> dspec_matrices;
    // tolerances (documented defaults)
    double eig_sep_tol = 1e-10;
    double cluster_tol = 0.0;
    double int_tol = 1e-7;
    double constraint_tol = 1e-12;
    double monitor_fail = 1e-6;
    double rtol = 1e-11;
    int K_levelt = 12;
    int K_formal = 8;

    CoalescedSystem to_system() const;
    DSpec to_dspec() const;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

SystemSpec parse_system_spec(const std::string& json_text);
SystemSpec load_system_spec(const std::string& path);
SystemSpec preset_spec(const std::string& name);   // "3d-example" | "4d-omega" | "caustic"
std::string dump_system_spec(const SystemSpec& spec);

// Machine-readable report: schema-versioned, deterministic field order,
// numbers at 17 significant digits.
struct ReportCheck {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = true;
};

struct Report {
    std::string command;
    std::string inputs_digest;
    std::vector<ReportCheck> checks;
    std::string verdict() const;
    double wall_ms = 0.0;

    void add(const std::string& name, double value, double tolerance);
    bool pass() const;
    // timing excluded when include_timing is false (byte-stable output)
    std::string to_json(bool include_timing = true) const;
};

std::string digest_hex(const std::string& data);   // FNV-1a 64

} // namespace isomono

#endif

#pragma once
/** @file
    Bit-stable artifact emission: branch.csv, summary.json, point snapshots.

    Everything numeric is serialized with "%.17g", which round-trips IEEE
    doubles exactly, and files are written through a single code path with
    '\n' line endings, so identical runs produce byte-identical artifacts.
    The one exception is the `timestamp` field of summary.json, which is
    excluded from the determinism contract by design. Snapshots are plain
    CSV (r, mu, rho, U) behind an 8-line '#' header carrying the grid spec,
    kappa, the offset, and the formulation mode -- enough to reconstruct the
    point for re-verification without the original run.
*/

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "config.hpp"
#include "continuation.hpp"

namespace rotstar {

namespace detail {

inline std::string fmt17(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

[[noreturn]] inline void io_fail(const std::string& what)
{
    throw Error(ErrorCode::IO_ERROR, what);
}

/// Parse one comma-separated row of exactly `n` doubles.
inline void parse_row(const std::string& line, double* out, int n, const std::string& ctx_msg)
{
    const char* p = line.c_str();
    for (int k = 0; k < n; ++k) {
        char* end = nullptr;
        out[k] = std::strtod(p, &end);
        if (end == p) io_fail(ctx_msg + ": expected " + std::to_string(n) + " numbers");
        p = end;
        if (k + 1 < n) {
            while (*p == ' ') ++p;
            if (*p != ',') io_fail(ctx_msg + ": expected ',' separator");
            ++p;
        }
    }
}

}  // namespace detail

inline const char* to_string(RotationMode m)
{
    return m == RotationMode::angular_velocity ? "velocity" : "momentum";
}

// ---------------------------------------------------------------------------
// branch.csv

inline constexpr const char* kBranchCsvHeader =
    "idx,kappa,kappa_sq,offset,mode,mass,mass_error,sup_rho,r_eq,r_pole,"
    "r_max_support,weighted_norm_s,o_n_margin,residual_inf,scf_iters,status";

inline void write_branch_csv(const Branch& b, std::ostream& os)
{
    os << kBranchCsvHeader << '\n';
    for (std::size_t i = 0; i < b.points.size(); ++i) {
        const SolutionPoint& p = b.points[i];
        const std::string status = i < b.steps.size() ? b.steps[i].status : "accepted";
        os << i << ',' << detail::fmt17(p.kappa) << ',' << detail::fmt17(p.kappa * p.kappa) << ','
           << detail::fmt17(p.offset) << ',' << to_string(p.mode) << ',' << detail::fmt17(p.mass)
           << ',' << detail::fmt17(p.mass_error) << ',' << detail::fmt17(p.diag.sup_rho) << ','
           << detail::fmt17(p.diag.r_eq) << ',' << detail::fmt17(p.diag.r_pole) << ','
           << detail::fmt17(p.diag.r_max_support) << ',' << detail::fmt17(p.diag.weighted_norm_s)
           << ',' << detail::fmt17(p.diag.o_n_margin) << ',' << detail::fmt17(p.residual_inf)
           << ',' << p.scf_iters << ',' << status << '\n';
    }
}

// ---------------------------------------------------------------------------
// point snapshots

inline std::string snapshot_filename(std::size_t idx)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "point_%04zu.csv", idx);
    return buf;
}

inline void write_snapshot(const SolutionPoint& p, std::size_t idx, std::ostream& os)
{
    const AxisGrid& g = *p.field.grid;
    os << "# rotstar snapshot\n"
       << "# version=" << VERSION << '\n'
       << "# idx=" << idx << '\n'
       << "# mode=" << to_string(p.mode) << '\n'
       << "# kappa=" << detail::fmt17(p.kappa) << '\n'
       << "# offset=" << detail::fmt17(p.offset) << '\n'
       << "# grid nr=" << g.nr << " nmu=" << g.nmu << " r_max=" << detail::fmt17(g.r_max) << '\n'
       << "# columns r,mu,rho,U\n";
    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nmu; ++j)
            os << detail::fmt17(g.r[i]) << ',' << detail::fmt17(g.mu[j]) << ','
               << detail::fmt17(p.field.at(i, j)) << ',' << detail::fmt17(p.potential.at(i, j))
               << '\n';
}

/// A snapshot read back from disk; the grid is reconstructed from its spec.
struct Snapshot {
    std::size_t idx = 0;
    RotationMode mode = RotationMode::angular_velocity;
    double kappa = 0.0;
    double offset = 0.0;
    AxisymmetricField rho;
    AxisymmetricField U;
};

inline Snapshot read_snapshot(std::istream& in)
{
    auto next = [&in](int n) {
        std::string line;
        if (!std::getline(in, line))
            detail::io_fail("snapshot: truncated header (line " + std::to_string(n) + ")");
        return line;
    };
    if (next(1) != "# rotstar snapshot") detail::io_fail("snapshot: bad magic line");
    next(2);  // version line, informational

    Snapshot s;
    long long idx = 0;
    if (std::sscanf(next(3).c_str(), "# idx=%lld", &idx) != 1 || idx < 0)
        detail::io_fail("snapshot: bad idx line");
    s.idx = static_cast<std::size_t>(idx);

    char modebuf[32] = {0};
    if (std::sscanf(next(4).c_str(), "# mode=%31s", modebuf) != 1)
        detail::io_fail("snapshot: bad mode line");
    const std::string mode = modebuf;
    if (mode == "velocity") s.mode = RotationMode::angular_velocity;
    else if (mode == "momentum") s.mode = RotationMode::angular_momentum;
    else detail::io_fail("snapshot: unknown mode '" + mode + "'");

    if (std::sscanf(next(5).c_str(), "# kappa=%lf", &s.kappa) != 1)
        detail::io_fail("snapshot: bad kappa line");
    if (std::sscanf(next(6).c_str(), "# offset=%lf", &s.offset) != 1)
        detail::io_fail("snapshot: bad offset line");

    int nr = 0, nmu = 0;
    double r_max = 0.0;
    if (std::sscanf(next(7).c_str(), "# grid nr=%d nmu=%d r_max=%lf", &nr, &nmu, &r_max) != 3)
        detail::io_fail("snapshot: bad grid line");
    next(8);  // column listing, informational

    GridPtr grid;
    try {
        grid = make_grid(nr, nmu, r_max);
    } catch (const std::exception& e) {
        detail::io_fail(std::string("snapshot: bad grid spec: ") + e.what());
    }
    s.rho = AxisymmetricField(grid);
    s.U = AxisymmetricField(grid);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nmu; ++j) {
            std::string line;
            if (!std::getline(in, line))
                detail::io_fail("snapshot: truncated data (need " + std::to_string(nr * nmu) +
                                " rows)");
            double row[4];
            detail::parse_row(line, row, 4, "snapshot row");
            s.rho.at(i, j) = row[2];
            s.U.at(i, j) = row[3];
        }
    return s;
}

inline Snapshot read_snapshot(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) detail::io_fail("snapshot: cannot open '" + path + "'");
    return read_snapshot(in);
}

// ---------------------------------------------------------------------------
// JSON views

inline nlohmann::ordered_json report_to_json(const ValidationReport& r)
{
    nlohmann::ordered_json j;
    j["overall"] = r.overall();
    j["checks"] = nlohmann::ordered_json::array();
    for (const Check& c : r.checks) {
        nlohmann::ordered_json cj;
        cj["name"] = c.name;
        cj["pass"] = c.pass;
        cj["measured"] = c.measured;
        cj["threshold"] = c.threshold;
        j["checks"].push_back(cj);
    }
    j["warnings"] = r.warnings;
    return j;
}

// ---------------------------------------------------------------------------
// summary.json

/// Deterministic part of the summary (everything except the timestamp).
inline nlohmann::ordered_json make_summary_json(const Branch& b, const RunConfig& cfg)
{
    nlohmann::ordered_json j;
    j["termination_reason"] = to_string(b.termination.reason);
    j["termination_detail"] = b.termination.detail;
    j["n_points"] = b.points.size();
    j["final_kappa"] = b.points.empty() ? 0.0 : b.points.back().kappa;
    nlohmann::ordered_json echo;
    for (const auto& [k, v] : config_echo(cfg)) echo[k] = v;
    j["config_echo"] = echo;
    j["version"] = VERSION;
    return j;
}

// ---------------------------------------------------------------------------
// write_outputs

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) io_fail("cannot open '" + path.string() + "' for writing");
    os << content;
    os.flush();
    if (!os) io_fail("write failed for '" + path.string() + "'");
}

inline std::string utc_timestamp()
{
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace detail

/** Emit branch.csv, summary.json, and every k-th point snapshot into `dir`.

    `extra` (typically the diagnostics block assembled by the run pipeline)
    is attached to summary.json under "diagnostics" when non-null. Returns
    the list of files written, in write order.
*/
inline std::vector<std::string> write_outputs(const Branch& b, const RunConfig& cfg,
                                              const std::string& dir,
                                              const nlohmann::ordered_json& extra = {})
{
    if (dir.empty()) detail::io_fail("write_outputs: empty output directory path");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) detail::io_fail("write_outputs: cannot create '" + dir + "': " + ec.message());

    std::vector<std::string> written;
    const std::filesystem::path base(dir);

    {
        std::ostringstream csv;
        write_branch_csv(b, csv);
        detail::write_file(base / "branch.csv", csv.str());
        written.push_back((base / "branch.csv").string());
    }

    const int every = cfg.output_snapshot_every < 1 ? 1 : cfg.output_snapshot_every;
    for (std::size_t i = 0; i < b.points.size(); ++i) {
        if (i % static_cast<std::size_t>(every) != 0) continue;
        std::ostringstream snap;
        write_snapshot(b.points[i], i, snap);
        const std::filesystem::path p = base / snapshot_filename(i);
        detail::write_file(p, snap.str());
        written.push_back(p.string());
    }

    {
        nlohmann::ordered_json j = make_summary_json(b, cfg);
        if (!extra.is_null()) j["diagnostics"] = extra;
        j["timestamp"] = detail::utc_timestamp();
        detail::write_file(base / "summary.json", j.dump(2) + "\n");
        written.push_back((base / "summary.json").string());
    }
    return written;
}

}  // namespace rotstar

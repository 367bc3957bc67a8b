#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "homspace/homspace.hpp"

#ifndef HOMSPACE_SCENARIO_DIR
#define HOMSPACE_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;
using namespace homspace;

namespace {

std::vector<std::string> split_formats(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string f; std::getline(ss, f, ',');)
        if (!f.empty()) out.push_back(f);
    return out;
}

void emit(const RunReport& rep, const std::string& out_dir, const std::vector<std::string>& formats) {
    fs::create_directories(out_dir);
    for (const auto& f : formats) {
        const fs::path p = fs::path(out_dir) / (rep.scenario + "." + f);
        if (f == "json") write_text_file(p.string(), report_json(rep).dump(2) + "\n");
        else if (f == "csv") write_text_file(p.string(), report_csv(rep));
        else throw InvalidInput("unknown format '" + f + "'");
    }
}

void summarize(const RunReport& rep, std::ostream& os) {
    for (const auto& o : rep.outcomes) {
        os << (o.met ? "  ok   " : "  MISS ") << rep.scenario << " / " << o.check << " (expect " << o.expect << ", "
           << o.rows << " rows, " << o.failed << " failed";
        if (!o.error.empty()) os << ", error: " << o.error;
        os << ")\n";
    }
}

unsigned thread_cap() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* e = std::getenv("HOMSPACE_THREADS")) {
        long v = std::strtol(e, nullptr, 10);
        if (v > 0) n = unsigned(v);
    }
    return n;
}

json diag_json(const Space& s) {
    json j;
    j["points"] = s.size();
    j["A0"] = s.A0();
    j["A0_witness"] = {s.A0_witness().x, s.A0_witness().y, s.A0_witness().z};
    j["A1"] = s.A1();
    j["A1_witness"] = {{"x", s.A1_witness().x}, {"r", s.A1_witness().radius}};
    j["min_distance"] = s.min_positive_dist();
    j["diameter"] = s.diameter();
    j["metric"] = is_metric(s.dist());
    json pw = json::array();
    for (const auto& c : doubling_power_checks(s)) pw.push_back({{"step", c.step}, {"measured", num_json(c.measured)}, {"bound", num_json(c.bound)}, {"pass", c.pass}});
    j["doubling_powers"] = pw;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite spaces of homogeneous type: construction and verification"};
    app.require_subcommand(1);

    std::string scenario, out_dir, formats = "json,csv";
    std::uint64_t seed = 0;
    auto* run = app.add_subcommand("run", "Run a scenario file");
    run->add_option("scenario", scenario, "scenario JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "report directory");
    run->add_option("--format", formats, "comma separated: csv,json");
    auto* seed_opt = run->add_option("--seed", seed, "override the scenario seed");

    std::string space_file;
    auto* diag = app.add_subcommand("diag", "Constants and regularity of a space");
    diag->add_option("space", space_file, "space JSON")->required()->check(CLI::ExistingFile);
    double alpha = 0, tau = 0;
    diag->add_option("--alpha", alpha, "report Ahlfors regularity at this exponent");
    diag->add_option("--tau", tau, "check annuli at this aspect");

    double delta = 0;
    int adjacent = 0;
    auto* dy = app.add_subcommand("dyadic", "Build and verify dyadic systems");
    dy->add_option("space", space_file, "space JSON")->required()->check(CLI::ExistingFile);
    dy->add_option("--delta", delta, "scale parameter (default: largest admissible)");
    dy->add_option("--adjacent", adjacent, "number of adjacent systems to build");
    dy->add_option("--seed", seed, "construction seed");

    std::string pack_dir = HOMSPACE_SCENARIO_DIR;
    auto* all = app.add_subcommand("verify-all", "Run every scenario of the pack");
    all->add_option("--dir", pack_dir, "scenario directory");
    all->add_option("--out", out_dir, "report directory");

    std::string tgt_file, map_file, eta_file;
    auto* qs = app.add_subcommand("qs", "Distortion envelope of a map between two spaces");
    qs->add_option("source", space_file, "source space JSON")->required()->check(CLI::ExistingFile);
    qs->add_option("target", tgt_file, "target space JSON")->required()->check(CLI::ExistingFile);
    qs->add_option("map", map_file, "map JSON {perm}")->required()->check(CLI::ExistingFile);
    qs->add_option("--eta", eta_file, "gauge JSON to test against")->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            std::optional<std::uint64_t> so;
            if (*seed_opt) so = seed;
            RunReport rep = run_scenario_file(scenario, so);
            summarize(rep, std::cout);
            if (!out_dir.empty()) emit(rep, out_dir, split_formats(formats));
            return rep.ok() ? 0 : 1;
        }
        if (*diag) {
            Space s = space_from_json(read_json_file(space_file));
            json j = diag_json(s);
            std::optional<std::pair<double, double>> ak;
            if (alpha > 0) {
                AlphaRegularity ar = check_alpha_regular(s, alpha);
                j["alpha_regular"] = {{"alpha", alpha}, {"kappa", ar.kappa}};
                ak = std::make_pair(alpha, ar.kappa);
            }
            if (tau > 0) {
                TauAnnuli ta = check_tau_annuli(s, tau, ak);
                j["annuli"] = {{"tau", tau}, {"holds", ta.holds}, {"x", ta.x}, {"r", ta.r}};
            }
            std::cout << j.dump(2) << "\n";
            return 0;
        }
        if (*dy) {
            Space s = space_from_json(read_json_file(space_file));
            json j;
            if (adjacent > 0) {
                const double d = delta > 0 ? delta : max_adjacent_delta(s.A0());
                AdjacentFamily fam = build_adjacent_systems(s, adjacent, d, seed, delta > 0);
                json sys = json::array();
                bool ok = true;
                for (const auto& y : fam.systems) {
                    SystemVerification v = verify_system(s, y);
                    ok = ok && v.all_pass();
                    sys.push_back(system_to_json(y));
                }
                j["systems"] = sys;
                j["coverage"] = {{"critical_balls", fam.coverage.total}, {"covered", fam.coverage.covered},
                                 {"fraction", fam.coverage.fraction}, {"C_adj", num_json(fam.coverage.C_adj)},
                                 {"C_bound", fam.coverage.C_bound}};
                std::cout << j.dump(2) << "\n";
                return ok ? 0 : 1;
            }
            SystemOptions o;
            o.delta = delta > 0 ? delta : max_single_delta(s.A0());
            o.allow_any_delta = delta > 0;
            o.seed = seed;
            DyadicSystem sys = build_system(s, o);
            SystemVerification v = verify_system(s, sys);
            j["system"] = system_to_json(sys);
            json props = json::array();
            for (const auto& p : v.properties) props.push_back({{"property", p.name}, {"pass", p.pass}, {"witness", p.witness}});
            j["properties"] = props;
            j["doubling"] = {{"measured", v.doubling.measured}, {"bound", num_json(v.doubling.bound)}, {"pass", v.doubling.pass}};
            std::cout << j.dump(2) << "\n";
            return v.all_pass() ? 0 : 1;
        }
        if (*qs) {
            Space src = space_from_json(read_json_file(space_file)), tgt = space_from_json(read_json_file(tgt_file));
            PointMap f = map_from_json(read_json_file(map_file));
            check_map(src, tgt, f);
            DistortionProfile prof = eta_profile(src, tgt, f);
            json j{{"thetas", prof.thetas}, {"values", prof.values}, {"triples", prof.triples}};
            int rc = 0;
            if (!eta_file.empty()) {
                QsVerdict v = is_quasisymmetric(prof, eta_from_json(read_json_file(eta_file)));
                j["quasisymmetric"] = v.holds;
                j["worst_ratio"] = num_json(v.worst_ratio);
                rc = v.holds ? 0 : 1;
            }
            std::cout << j.dump(2) << "\n";
            return rc;
        }
        if (*all) {
            std::vector<fs::path> files;
            for (const auto& e : fs::directory_iterator(pack_dir))
                if (e.path().extension() == ".json") files.push_back(e.path());
            std::sort(files.begin(), files.end());
            std::vector<RunReport> reps(files.size());
            std::vector<std::string> errors(files.size());
            std::atomic<std::size_t> next{0};
            auto worker = [&] {
                for (std::size_t i; (i = next++) < files.size();) {
                    try {
                        reps[i] = run_scenario_file(files[i].string());
                    } catch (const std::exception& e) {
                        errors[i] = e.what();
                    }
                }
            };
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < std::min<std::size_t>(thread_cap(), files.size()); ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
            bool ok = true;
            for (std::size_t i = 0; i < files.size(); ++i) {
                if (!errors[i].empty()) {
                    std::cout << "  MISS " << files[i].filename().string() << ": " << errors[i] << "\n";
                    ok = false;
                    continue;
                }
                summarize(reps[i], std::cout);
                ok = ok && reps[i].ok();
                if (!out_dir.empty()) emit(reps[i], out_dir, {"json", "csv"});
            }
            std::cout << (ok ? "all expectations met\n" : "some expectations missed\n");
            return ok ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

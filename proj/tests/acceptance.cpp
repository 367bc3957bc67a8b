// One PASS/FAIL line per acceptance criterion. Each criterion is a scenario file of the shipped pack
// and passes when every expectation in it is met. Tolerances are pinned in the scenario files and
// in the check implementations.
#include <atomic>
#include <cstdlib>
#include <iostream>
#include <thread>

#include "homspace/homspace.hpp"

#ifndef HOMSPACE_SCENARIO_DIR
#define HOMSPACE_SCENARIO_DIR "scenarios"
#endif

using namespace homspace;

namespace {

struct Criterion {
    int id;
    const char* title;
    const char* file;
};

const Criterion kCriteria[] = {
    {1, "chain metric recovers D from D^beta", "accept-01.json"},
    {2, "quasitriangle constant of D^beta", "accept-02.json"},
    {3, "dyadic system soundness on the 50-space pack", "accept-03.json"},
    {4, "adjacent systems cover critical balls", "accept-04.json"},
    {5, "Calderon-Zygmund decomposition", "accept-05.json"},
    {6, "weight chain from reverse Hoelder to BMO", "accept-06.json"},
    {7, "covering lemmas", "accept-07.json"},
    {8, "quasisymmetric pipeline", "accept-08.json"},
    {9, "Radon-Nikodym integral identity", "accept-09.json"},
    {10, "byte-identical reports on rerun", "accept-10.json"},
};

std::string describe_failure(const RunReport& r) {
    for (const auto& o : r.outcomes) {
        if (o.met) continue;
        if (!o.error.empty()) return o.check + ": " + o.error;
        for (const auto& row : r.rows)
            if (row.check == o.check && row.required && !row.pass)
                return o.check + ": " + row.subject + " / " + row.step + " measured " + fmt_num(row.measured) +
                       " bound " + fmt_num(row.bound);
        return o.check + ": expectation '" + o.expect + "' missed";
    }
    return {};
}

}  // namespace

int main() {
    const std::string dir = HOMSPACE_SCENARIO_DIR;
    constexpr std::size_t N = std::size(kCriteria);
    std::vector<std::string> verdict(N);
    std::vector<bool> pass(N, false);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < N;) {
            try {
                RunReport r = run_scenario_file(dir + "/" + kCriteria[i].file);
                pass[i] = r.ok() && !r.outcomes.empty();
                verdict[i] = pass[i] ? std::to_string(r.rows.size()) + " rows" : describe_failure(r);
            } catch (const std::exception& e) {
                verdict[i] = std::string("error: ") + e.what();
            }
        }
    };
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    if (const char* e = std::getenv("HOMSPACE_THREADS"))
        if (long v = std::strtol(e, nullptr, 10); v > 0) threads = unsigned(v);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::min<std::size_t>(threads, N); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    bool all = true;
    for (std::size_t i = 0; i < N; ++i) {
        std::cout << "criterion " << kCriteria[i].id << " (" << kCriteria[i].title << "): " << (pass[i] ? "PASS" : "FAIL")
                  << " [" << verdict[i] << "]\n";
        all = all && pass[i];
    }
    return all ? 0 : 1;
}

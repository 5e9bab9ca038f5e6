// Standalone invariant suites over randomized inputs. One line per suite.
#include <chrono>
#include <cstdio>
#include <filesystem>

#include "suites.hpp"

namespace {

int failures = 0;

void report(const char* name, const suites::Outcome& out, double secs) {
    std::printf("%-28s %s (%.2fs)\n", name, out.ok ? "PASS" : "FAIL", secs);
    if (!out.ok) {
        std::printf("    %s\n", out.detail.c_str());
        ++failures;
    }
}

template <typename F>
void run(const char* name, F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    suites::Outcome out = f();
    auto t1 = std::chrono::steady_clock::now();
    report(name, out, std::chrono::duration<double>(t1 - t0).count());
}

} // namespace

int main() {
    namespace fs = std::filesystem;
    fs::path tmp = fs::temp_directory_path() / "xlq_properties";
    fs::create_directories(tmp);

    run("numbering", [] { return suites::suite_numbering(200, 11); });
    run("unifier", [] { return suites::suite_unifier(1000, 12); });
    run("roundtrip", [] { return suites::suite_roundtrip(80, 13); });
    run("indexes", [] { return suites::suite_indexes(60, 14); });
    run("reorder-invariance", [] { return suites::suite_reorder(25, 15); });
    run("cache-sequences", [] { return suites::suite_cache(40, 16); });
    run("store-agnostic",
        [&] { return suites::suite_store_agnostic(15, 17, tmp.string()); });
    run("fact-touch", [] { return suites::suite_fact_touch(30, 18); });
    run("specialize-vs-oracle", [] { return suites::suite_specialize_oracle(40, 19); });
    run("differential-core", [] { return suites::suite_differential(60, 4, false, 20); });
    run("differential-wildcards",
        [] { return suites::suite_differential(40, 4, true, 21); });

    std::error_code ec;
    fs::remove_all(tmp, ec);
    if (failures) {
        std::printf("%d suite(s) failed\n", failures);
        return 1;
    }
    std::printf("all suites passed\n");
    return 0;
}

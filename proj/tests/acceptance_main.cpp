// Acceptance suite driver: prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Also reachable through `cochlea verify`.

#include <cstring>
#include <iostream>
#include <string>

#include "cochlea/verify.hpp"

int main(int argc, char** argv) {
    cochlea::AcceptanceOptions opts;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--cache" && i + 1 < argc) {
            opts.cache_dir = argv[++i];
        } else if (a == "--seed" && i + 1 < argc) {
            opts.seed = std::stoull(argv[++i]);
        } else if (a == "--only" && i + 1 < argc) {
            std::string list = argv[++i];
            std::size_t pos = 0;
            while (pos < list.size()) {
                std::size_t next = list.find(',', pos);
                if (next == std::string::npos) next = list.size();
                opts.only.push_back(std::stoi(list.substr(pos, next - pos)));
                pos = next + 1;
            }
        } else {
            std::cerr << "usage: acceptance [--cache DIR] [--seed N] [--only 1,2,...]\n";
            return 2;
        }
    }
    const auto results = cochlea::run_acceptance(opts, std::cout);
    int failed = 0;
    for (const auto& r : results)
        if (!r.pass) ++failed;
    std::cout << (failed == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED") << " ("
              << results.size() - failed << "/" << results.size() << " criteria)\n";
    return failed == 0 ? 0 : 4;
}

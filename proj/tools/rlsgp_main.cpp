#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "rlsgp/harness.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        const rlsgp::ExperimentSpec spec = rlsgp::parse_cli(args);
        const rlsgp::ExperimentResults results = rlsgp::run_experiment(spec);

        std::printf("wrote %s/raw.csv (%zu cells x %u runs)\n", spec.out_dir.c_str(),
                    results.records.size(), spec.runs);
        for (std::size_t c = 0; c < results.summaries.size(); ++c) {
            const rlsgp::SummaryRow& row = results.summaries[c];
            const std::string label = spec.cells[c].label();
            if (row.runtime) {
                std::printf("%-24s runs=%llu stuck=%llu B=%s T=%s (%s) S=%s (%s)\n",
                            label.c_str(),
                            static_cast<unsigned long long>(row.runs),
                            static_cast<unsigned long long>(row.stuck),
                            rlsgp::format_value(row.stuck_proportion).c_str(),
                            rlsgp::format_value(row.runtime->mean).c_str(),
                            rlsgp::format_value(row.runtime->stddev).c_str(),
                            rlsgp::format_value(row.size->mean).c_str(),
                            rlsgp::format_value(row.size->stddev).c_str());
            } else {
                std::printf("%-24s runs=%llu stuck=%llu (no successful runs)\n",
                            label.c_str(),
                            static_cast<unsigned long long>(row.runs),
                            static_cast<unsigned long long>(row.stuck));
            }
        }
        return 0;
    } catch (const rlsgp::HelpRequested& help) {
        std::fputs(help.text.c_str(), stdout);
        return 0;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

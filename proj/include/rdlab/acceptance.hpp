#pragma once
// End-to-end acceptance checks A1..A10 with pinned thresholds.

#include <functional>
#include <string>
#include <vector>

namespace rdlab::acceptance {

struct Result {
    std::string id;
    std::string title;
    bool pass = false;
    std::string measured;
    std::string threshold;
    double seconds = 0.0;
};

/// "phase", "sturm", "solver", "omega" or "all".  Throws ArgumentError on anything else.
std::vector<std::string> suite(const std::string& name);
std::vector<std::string> suite_names();

/// Runs the named criteria in order, sharing simulation runs between them.
std::vector<Result> run(const std::vector<std::string>& ids, const std::function<void(const Result&)>& on_result = {});

std::string format(const Result& r);

}  // namespace rdlab::acceptance

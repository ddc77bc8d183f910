#pragma once

#include <string>
#include <vector>

namespace ftmimo::svg {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    std::vector<Series> series;
};

/// Static line chart. Non-finite points (and non-positive ones on a log
/// axis) are skipped.
std::string render(const Chart& chart);

}  // namespace ftmimo::svg

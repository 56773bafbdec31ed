#pragma once
// Uniform grids on [-L, L] with an odd node count (x = 0 is a node), sampled
// profiles and the initial-data families.

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace rdlab {

class Grid {
public:
    Grid() = default;
    /// Throws ArgumentError unless L > 0 and N >= 3 is odd.
    Grid(double half_width, std::size_t nodes);
    /// Grid whose spacing is dx (2L/dx must be an even integer up to rounding).
    static Grid with_spacing(double half_width, double dx);

    double half_width() const { return L_; }
    std::size_t size() const { return N_; }
    double dx() const { return dx_; }
    std::size_t center() const { return (N_ - 1) / 2; }
    /// x_j = (j - center) dx, so x_center == 0 exactly.
    double x(std::size_t j) const {
        return (static_cast<double>(j) - static_cast<double>(center())) * dx_;
    }
    /// Index of the node nearest to x, clamped to the grid.
    std::size_t nearest(double x) const;
    bool operator==(const Grid& o) const { return N_ == o.N_ && L_ == o.L_; }

private:
    double L_ = 1.0;
    std::size_t N_ = 3;
    double dx_ = 1.0;
};

struct Profile {
    Grid grid;
    std::vector<double> values;

    double sup_norm() const;
    std::span<const double> view() const { return values; }
};

/// Restriction of p to the symmetric sub-grid |x| <= half_width.
Profile restrict_to_window(const Grid& grid, std::span<const double> values, double half_width);

namespace initial {
/// alpha at -infinity, beta at +infinity, transition tanh(s (x - center)).
struct Front {
    double alpha = 1.0;
    double beta = -1.0;
    double steepness = 1.0;
    double center = 0.0;
};
/// height * exp(-((x - center)/width)^2)
struct Bump {
    double height = 1.0;
    double center = 0.0;
    double width = 1.0;
};
struct Plateau {
    double lo = 0.0;
    double hi = 1.0;
    double value = 1.0;
};
/// base outside the intervals, smooth tanh transitions of the given width.
struct Plateaus {
    std::vector<Plateau> intervals;
    double base = 0.0;
    double transition = 1.0;
};
struct Samples {
    std::vector<double> values;
};
}  // namespace initial

using InitialFamily =
    std::variant<initial::Front, initial::Bump, initial::Plateaus, initial::Samples>;

struct InitialData {
    Profile profile;
    double alpha = 0.0;  // declared limit at -infinity
    double beta = 0.0;   // declared limit at +infinity
    /// max deviation of the unpinned family from its limits at x = -L, +L
    double far_field_deviation = 0.0;
    bool hypothesis_ok() const;  // alpha != beta
};

/// Samples the family on the grid; the end nodes are set to the declared limits.
InitialData make_initial(const InitialFamily& family, const Grid& grid);

std::string family_name(const InitialFamily& family);

}  // namespace rdlab

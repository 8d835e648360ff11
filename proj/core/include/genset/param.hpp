#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "genset/errors.hpp"

namespace genset {

// One named scalar with box bounds. `frozen` entries are excluded from the
// free vector handed to the optimizer.
struct Param {
    std::string name;
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool frozen = false;
};

// Ordered, named, bounded parameter set. Immutable-style: mutating helpers
// return copies.
class ParameterVector {
  public:
    ParameterVector() = default;
    explicit ParameterVector(std::vector<Param> entries);

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::vector<Param>& entries() const { return entries_; }

    bool has(const std::string& name) const;
    const Param& at(const std::string& name) const;
    double value(const std::string& name) const { return at(name).value; }

    ParameterVector with_value(const std::string& name, double v) const;
    ParameterVector with_bounds(const std::string& name, double lo, double hi) const;
    ParameterVector with_frozen(const std::string& name, bool frozen) const;

    // Projects every value onto [lower, upper]. Idempotent.
    ParameterVector clamp_to_bounds() const;

    // Free (non-frozen) coordinates, in entry order.
    std::vector<std::string> free_names() const;
    std::vector<double> free_values() const;
    std::vector<double> free_lower() const;
    std::vector<double> free_upper() const;
    ParameterVector with_free_values(const std::vector<double>& x) const;

  private:
    void check_invariants() const;
    std::vector<Param> entries_;
};

} // namespace genset

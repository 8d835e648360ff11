#include "genset/param.hpp"

#include <algorithm>
#include <unordered_set>

namespace genset {

ParameterVector::ParameterVector(std::vector<Param> entries) : entries_(std::move(entries)) {
    check_invariants();
}

void ParameterVector::check_invariants() const {
    std::unordered_set<std::string> seen;
    for (const auto& p : entries_) {
        if (p.name.empty()) throw ValidationError("parameter with empty name");
        if (!seen.insert(p.name).second)
            throw ValidationError("duplicate parameter name: " + p.name);
        if (p.lower > p.upper)
            throw ValidationError("malformed bounds for " + p.name + ": lower > upper");
    }
}

bool ParameterVector::has(const std::string& name) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const Param& p) { return p.name == name; });
}

const Param& ParameterVector::at(const std::string& name) const {
    for (const auto& p : entries_)
        if (p.name == name) return p;
    throw ValidationError("unknown parameter: " + name);
}

ParameterVector ParameterVector::with_value(const std::string& name, double v) const {
    auto out = entries_;
    for (auto& p : out)
        if (p.name == name) {
            p.value = v;
            return ParameterVector(std::move(out));
        }
    throw ValidationError("unknown parameter: " + name);
}

ParameterVector ParameterVector::with_bounds(const std::string& name, double lo, double hi) const {
    if (lo > hi) throw ValidationError("malformed bounds for " + name + ": lower > upper");
    auto out = entries_;
    for (auto& p : out)
        if (p.name == name) {
            p.lower = lo;
            p.upper = hi;
            return ParameterVector(std::move(out));
        }
    throw ValidationError("unknown parameter: " + name);
}

ParameterVector ParameterVector::with_frozen(const std::string& name, bool frozen) const {
    auto out = entries_;
    for (auto& p : out)
        if (p.name == name) {
            p.frozen = frozen;
            return ParameterVector(std::move(out));
        }
    throw ValidationError("unknown parameter: " + name);
}

ParameterVector ParameterVector::clamp_to_bounds() const {
    auto out = entries_;
    for (auto& p : out) p.value = std::clamp(p.value, p.lower, p.upper);
    return ParameterVector(std::move(out));
}

std::vector<std::string> ParameterVector::free_names() const {
    std::vector<std::string> out;
    for (const auto& p : entries_)
        if (!p.frozen) out.push_back(p.name);
    return out;
}

std::vector<double> ParameterVector::free_values() const {
    std::vector<double> out;
    for (const auto& p : entries_)
        if (!p.frozen) out.push_back(p.value);
    return out;
}

std::vector<double> ParameterVector::free_lower() const {
    std::vector<double> out;
    for (const auto& p : entries_)
        if (!p.frozen) out.push_back(p.lower);
    return out;
}

std::vector<double> ParameterVector::free_upper() const {
    std::vector<double> out;
    for (const auto& p : entries_)
        if (!p.frozen) out.push_back(p.upper);
    return out;
}

ParameterVector ParameterVector::with_free_values(const std::vector<double>& x) const {
    auto out = entries_;
    std::size_t k = 0;
    for (auto& p : out)
        if (!p.frozen) {
            if (k >= x.size()) throw ValidationError("free-value vector too short");
            p.value = x[k++];
        }
    if (k != x.size()) throw ValidationError("free-value vector too long");
    return ParameterVector(std::move(out));
}

} // namespace genset

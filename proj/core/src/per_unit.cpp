#include "genset/per_unit.hpp"

namespace genset {

std::string to_string(Channel c) {
    switch (c) {
    case Channel::active_power: return "P";
    case Channel::reactive_power: return "Q";
    case Channel::voltage: return "V";
    case Channel::frequency: return "f";
    case Channel::current: return "I";
    case Channel::fuel: return "fuel";
    }
    throw ValidationError("unknown channel kind");
}

Channel channel_from_string(const std::string& s) {
    if (s == "P") return Channel::active_power;
    if (s == "Q") return Channel::reactive_power;
    if (s == "V") return Channel::voltage;
    if (s == "f") return Channel::frequency;
    if (s == "I") return Channel::current;
    if (s == "fuel") return Channel::fuel;
    throw ValidationError("unknown channel kind: " + s);
}

double PerUnitBase::base_for(Channel kind) const {
    validate();
    switch (kind) {
    case Channel::active_power:
    case Channel::reactive_power: return s_base;
    case Channel::voltage: return v_base;
    case Channel::frequency: return f_base;
    case Channel::current: return i_base();
    case Channel::fuel: return fuel_base;
    }
    throw ValidationError("unknown channel kind");
}

} // namespace genset

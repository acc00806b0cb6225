#pragma once

#include <stdexcept>
#include <string>

namespace mklab {

struct GeometryMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BalanceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnsupportedExponentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidPotentialError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RayRangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateRayError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExpansionDomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateCurveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OffsetTooLargeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InadmissibleEpsilonError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridTooCoarseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace mklab

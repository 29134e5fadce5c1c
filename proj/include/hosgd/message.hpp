#pragma once

#include <cstddef>
#include <stdexcept>

#include "hosgd/vec.hpp"

namespace hosgd {

/// A message kind mismatch within one aggregation round.
class ProtocolError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// An objective returned NaN/Inf inside an estimator; the run aborts.
class NonFiniteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// What one worker transmits for one iteration. A first-order message
/// carries the full d-vector (d scalars on the wire); a zeroth-order
/// message carries one scalar, the batch-averaged finite-difference
/// coefficient, and the receiver reconstructs coefficient * direction(t+1,
/// sender) from the pre-shared seed.
struct GradientMessage {
    enum class Kind { first_order, zeroth_order };

    Kind kind = Kind::first_order;
    int sender = 0;      // worker index, 1-based
    long iteration = 0;  // t

    ModelVector payload_vector;  // set iff kind == first_order
    double payload_scalar = 0.0; // set iff kind == zeroth_order

    std::size_t scalar_count() const {
        return kind == Kind::first_order ? payload_vector.size() : 1;
    }
};

}  // namespace hosgd

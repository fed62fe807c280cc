#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace kcef {

/// Exact arithmetic carrier. Always kept in canonical (reduced, positive
/// denominator) form by GMP.
using Rational = mpq_class;
using Integer = mpz_class;

/// Raised on malformed user input (bad lengths, unparseable files, ...).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an operation's precondition on the mathematical domain fails,
/// e.g. asking for the residual demand of a feasible set.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an exhaustive oracle is asked to enumerate beyond its cap.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal invariant was violated. Never expected to fire; carries a
/// diagnostic trace in what().
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// num/den in canonical form. Throws DomainError for den == 0.
Rational ratio(std::int64_t num, std::int64_t den);

/// "p/q" with q >= 1, always including the denominator.
std::string to_string(const Rational& q);

/// Accepts "p/q", "p", and finite decimals such as "0.25" or "-1.5".
Rational parse_rational(std::string_view text);

Integer floor(const Rational& q);
Integer ceil(const Rational& q);

/// Smallest b with 2^b >= m (0 for m <= 1).
int ceil_log2(std::int64_t m);

}  // namespace kcef

#pragma once

#include <stdexcept>
#include <string>

namespace steinlab {

// Two failure buckets, mirrored by the CLI exit codes: malformed or
// out-of-contract input (exit 2) vs. a certification that could not be
// completed (exit 4).  Indeterminate verdicts are not errors.
enum class ErrorKind { Input, Certification };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

#define STEINLAB_DEFINE_ERROR(Name, Kind)                          \
  class Name : public Error {                                      \
  public:                                                          \
    explicit Name(const std::string& what)                         \
        : Error(ErrorKind::Kind, std::string(#Name ": ") + what) {} \
  }

STEINLAB_DEFINE_ERROR(NotUnimodular, Input);
STEINLAB_DEFINE_ERROR(ZeroCoordinate, Input);
STEINLAB_DEFINE_ERROR(DegenerateDegreeZero, Input);
STEINLAB_DEFINE_ERROR(ZeroConstantTerm, Input);
STEINLAB_DEFINE_ERROR(DegreeTooLarge, Input);
STEINLAB_DEFINE_ERROR(NonPositiveMargin, Input);
STEINLAB_DEFINE_ERROR(NonUnitConstantTerm, Input);
STEINLAB_DEFINE_ERROR(SpectrumShapeMismatch, Input);
STEINLAB_DEFINE_ERROR(OutsideStrip, Input);
STEINLAB_DEFINE_ERROR(HypothesisViolated, Input);
STEINLAB_DEFINE_ERROR(SchemaViolation, Input);
STEINLAB_DEFINE_ERROR(DimensionMismatch, Input);

STEINLAB_DEFINE_ERROR(CertificationFailed, Certification);
STEINLAB_DEFINE_ERROR(IllConditionedFrame, Certification);
STEINLAB_DEFINE_ERROR(RankDeficient, Certification);
STEINLAB_DEFINE_ERROR(MembershipFailure, Certification);
STEINLAB_DEFINE_ERROR(TailNotCertifiable, Certification);
STEINLAB_DEFINE_ERROR(AliasingSuspected, Certification);
STEINLAB_DEFINE_ERROR(SearchFailed, Certification);
STEINLAB_DEFINE_ERROR(NonConvergedSolve, Certification);

#undef STEINLAB_DEFINE_ERROR

} // namespace steinlab

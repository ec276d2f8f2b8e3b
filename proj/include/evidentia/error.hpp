#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace evidentia {

// Base of every engine error. `kind()` is the stable machine-readable name
// surfaced by the CLI and by the service's `error.kind` field.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define EVIDENTIA_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

// graph-core
EVIDENTIA_DEFINE_ERROR(CycleError);
EVIDENTIA_DEFINE_ERROR(UnknownNode);
EVIDENTIA_DEFINE_ERROR(DuplicateNode);
EVIDENTIA_DEFINE_ERROR(InvalidQuery);

// discrete-bn
EVIDENTIA_DEFINE_ERROR(InvalidModel);
EVIDENTIA_DEFINE_ERROR(IncompleteAssignment);
EVIDENTIA_DEFINE_ERROR(UnknownState);
EVIDENTIA_DEFINE_ERROR(TooLarge);
EVIDENTIA_DEFINE_ERROR(ImpossibleEvidence);
EVIDENTIA_DEFINE_ERROR(ConflictingEvidence);
EVIDENTIA_DEFINE_ERROR(InvalidWeights);

// oobn
EVIDENTIA_DEFINE_ERROR(DuplicateClass);
EVIDENTIA_DEFINE_ERROR(DanglingInterface);
EVIDENTIA_DEFINE_ERROR(ClassCycle);
EVIDENTIA_DEFINE_ERROR(UnknownClass);
EVIDENTIA_DEFINE_ERROR(DuplicateInstance);
EVIDENTIA_DEFINE_ERROR(StateSpaceMismatch);
EVIDENTIA_DEFINE_ERROR(UnboundInput);

// ceg
EVIDENTIA_DEFINE_ERROR(Disconnected);
EVIDENTIA_DEFINE_ERROR(DuplicateSiblingLabel);
EVIDENTIA_DEFINE_ERROR(FloretMismatch);
EVIDENTIA_DEFINE_ERROR(LeafStaging);
EVIDENTIA_DEFINE_ERROR(UnassignedStageProbability);
EVIDENTIA_DEFINE_ERROR(NoSurvivingPath);
EVIDENTIA_DEFINE_ERROR(InvalidOrder);
EVIDENTIA_DEFINE_ERROR(NotACut);

// wigmore
EVIDENTIA_DEFINE_ERROR(MissingProbandum);
EVIDENTIA_DEFINE_ERROR(InvalidChart);

// corpus / io
EVIDENTIA_DEFINE_ERROR(ParseError);
EVIDENTIA_DEFINE_ERROR(CrossrefError);
EVIDENTIA_DEFINE_ERROR(SubmodelInvalid);
EVIDENTIA_DEFINE_ERROR(UnknownItem);
EVIDENTIA_DEFINE_ERROR(IoError);

#undef EVIDENTIA_DEFINE_ERROR

// One violated invariant in a report-style validation.
struct Finding {
  std::string code;     // e.g. "unnormalized-row"
  std::string subject;  // node, stage or element the finding is about
  std::string message;

  bool operator==(const Finding&) const = default;
};

using ValidationReport = std::vector<Finding>;

}  // namespace evidentia

#pragma once

#include <stdexcept>
#include <string>

namespace valsteer {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define VALSTEER_DEFINE_ERROR(NAME)                                   \
    class NAME : public Error {                                       \
    public:                                                           \
        explicit NAME(const std::string& msg) : Error(#NAME ": " + msg) {} \
    }

// datamodel
VALSTEER_DEFINE_ERROR(ParseError);
VALSTEER_DEFINE_ERROR(IntegrityError);
VALSTEER_DEFINE_ERROR(EmptyResult);
VALSTEER_DEFINE_ERROR(TooFewQuestions);

// scoring
VALSTEER_DEFINE_ERROR(UnlabeledRecord);
VALSTEER_DEFINE_ERROR(EmptyMatrix);
VALSTEER_DEFINE_ERROR(EmptyInput);

// causal
VALSTEER_DEFINE_ERROR(DegenerateVariance);
VALSTEER_DEFINE_ERROR(InsufficientSamples);
VALSTEER_DEFINE_ERROR(NotExtendable);
VALSTEER_DEFINE_ERROR(UnknownNode);
VALSTEER_DEFINE_ERROR(InvalidGraph);

// metrics
VALSTEER_DEFINE_ERROR(MissingBaseline);
VALSTEER_DEFINE_ERROR(UnknownValue);
VALSTEER_DEFINE_ERROR(UndefinedCell);
VALSTEER_DEFINE_ERROR(EmptySteeringSet);
VALSTEER_DEFINE_ERROR(NoDefinedMetrics);
VALSTEER_DEFINE_ERROR(NoChanges);

// synthlab
VALSTEER_DEFINE_ERROR(NodeMismatch);

// harness
VALSTEER_DEFINE_ERROR(MissingSlot);
VALSTEER_DEFINE_ERROR(JudgeFormatError);
VALSTEER_DEFINE_ERROR(EndpointError);
VALSTEER_DEFINE_ERROR(AuthError);
VALSTEER_DEFINE_ERROR(UnsupportedCondition);

// shared
VALSTEER_DEFINE_ERROR(InvalidParameter);

#undef VALSTEER_DEFINE_ERROR

} // namespace valsteer

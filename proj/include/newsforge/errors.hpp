#pragma once

#include <stdexcept>
#include <string>

namespace newsforge {

// Base class for every error this library throws. The message always starts
// with the error name (e.g. "DimensionMismatch: ...") so callers and the CLI
// can report a stable, grep-able text.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define NEWSFORGE_DEFINE_ERROR(NAME)                                        \
    class NAME##Error : public Error {                                      \
    public:                                                                 \
        explicit NAME##Error(const std::string& detail)                     \
            : Error(std::string(#NAME) + ": " + detail) {}                  \
    }

NEWSFORGE_DEFINE_ERROR(ShapeMismatch);
NEWSFORGE_DEFINE_ERROR(BadRange);
NEWSFORGE_DEFINE_ERROR(NonFinite);
NEWSFORGE_DEFINE_ERROR(MissingFile);
NEWSFORGE_DEFINE_ERROR(MalformedRecord);
NEWSFORGE_DEFINE_ERROR(UnknownLabel);
NEWSFORGE_DEFINE_ERROR(EmptyCorpus);
NEWSFORGE_DEFINE_ERROR(EmptyInput);
NEWSFORGE_DEFINE_ERROR(MalformedLine);
NEWSFORGE_DEFINE_ERROR(DimensionMismatch);
NEWSFORGE_DEFINE_ERROR(LengthMismatch);
NEWSFORGE_DEFINE_ERROR(BadLabel);
NEWSFORGE_DEFINE_ERROR(EmptyMatrix);
NEWSFORGE_DEFINE_ERROR(CacheMismatch);
NEWSFORGE_DEFINE_ERROR(NonFiniteLoss);
NEWSFORGE_DEFINE_ERROR(EmptySequenceInBatch);
NEWSFORGE_DEFINE_ERROR(Config);

#undef NEWSFORGE_DEFINE_ERROR

} // namespace newsforge

#pragma once

#include <stdexcept>
#include <string>

namespace causalpanel {

// Base class for all toolkit errors. The message carries a "module: kind:"
// prefix so the CLI can report where a failure came from.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define CAUSALPANEL_ERROR(Name, prefix)                                        \
    struct Name : Error {                                                      \
        explicit Name(const std::string& detail) : Error(prefix + detail) {}   \
    }

// ingest
CAUSALPANEL_ERROR(MalformedCsv, std::string("ingest: malformed CSV: "));
CAUSALPANEL_ERROR(NonMonotoneCumulative, std::string("ingest: cumulative series decreased: "));
CAUSALPANEL_ERROR(DateGap, std::string("ingest: missing day in date axis: "));
CAUSALPANEL_ERROR(DuplicateCountry, std::string("ingest: duplicate country row: "));
CAUSALPANEL_ERROR(OutOfRangeFraction, std::string("ingest: fraction outside [0,1]: "));
CAUSALPANEL_ERROR(SentimentOutOfRange, std::string("ingest: sentiment outside [-1,1]: "));
CAUSALPANEL_ERROR(MissingCountry, std::string("ingest: requested country absent: "));
CAUSALPANEL_ERROR(MissingDateCoverage, std::string("ingest: date coverage incomplete: "));

// features
CAUSALPANEL_ERROR(NegativeNewCount, std::string("features: cumulative count decreased: "));
CAUSALPANEL_ERROR(EmptyMatrix, std::string("features: empty matrix: "));
CAUSALPANEL_ERROR(ColumnMismatch, std::string("features: column set mismatch: "));

// notears
CAUSALPANEL_ERROR(DimensionMismatch, std::string("notears: dimension mismatch: "));

// bayesnet
CAUSALPANEL_ERROR(UnknownVariable, std::string("bayesnet: unknown variable or level: "));
CAUSALPANEL_ERROR(InconsistentEvidence, std::string("bayesnet: evidence has probability zero: "));
CAUSALPANEL_ERROR(StateSpaceTooLarge, std::string("bayesnet: joint state space exceeds guard: "));
CAUSALPANEL_ERROR(IncompleteRow, std::string("bayesnet: row does not assign every non-target variable: "));

// eval
CAUSALPANEL_ERROR(SingleCountry, std::string("eval: need at least two countries: "));
CAUSALPANEL_ERROR(DegenerateLabels, std::string("eval: test labels are single-class: "));
CAUSALPANEL_ERROR(CyclicSpec, std::string("eval: DAG spec contains a cycle: "));

// cli
CAUSALPANEL_ERROR(ConfigError, std::string("cli: bad configuration: "));
CAUSALPANEL_ERROR(IoError, std::string("cli: I/O failure: "));

#undef CAUSALPANEL_ERROR

} // namespace causalpanel

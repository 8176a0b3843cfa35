#pragma once
#include <stdexcept>
#include <string>

namespace lz {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// bad user input: zero vectors, malformed files, out-of-range parameters
struct InputError : Error { using Error::Error; };

struct NotACorner : Error { using Error::Error; };
struct SingularCase : Error { using Error::Error; };
struct DegenerateTheta : Error { using Error::Error; };
struct NoSolution : Error { using Error::Error; };
struct RootFindingFailure : Error { using Error::Error; };
struct InvalidInsertionPoint : Error { using Error::Error; };
struct NotEquatorial : Error { using Error::Error; };
struct DegenerateY : Error { using Error::Error; };
struct OutOfDomain : Error { using Error::Error; };
struct TargetUnreached : Error { using Error::Error; };
struct NoLoopFound : Error { using Error::Error; };

// the oracle found something strictly better than every synthesized candidate
struct OracleDisagreement : Error { using Error::Error; };

}  // namespace lz

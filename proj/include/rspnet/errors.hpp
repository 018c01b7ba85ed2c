#pragma once

#include <stdexcept>
#include <string>

namespace rspnet {

// exit_code groups errors for the CLI: 2 config parse, 3 semantic (bad
// config values or regime preconditions), 4 io, 5 internal/numeric
struct Error : std::runtime_error {
    int exit_code;
    explicit Error(const std::string& what, int code = 5)
        : std::runtime_error(what), exit_code(code) {}
};

namespace detail {
template <int Code>
struct CodedError : Error {
    explicit CodedError(const std::string& what) : Error(what, Code) {}
};
}

// network validation
struct NegativeWeight : detail::CodedError<3> { using CodedError::CodedError; };
struct NotColumnStochastic : detail::CodedError<3> { using CodedError::CodedError; };
struct NotIrreducible : detail::CodedError<3> { using CodedError::CodedError; };

// eigen-structure construction
struct NotDiagonalizable : detail::CodedError<3> { using CodedError::CodedError; };
struct ResidualTooLarge : detail::CodedError<5> { using CodedError::CodedError; };

// dynamics
struct ProbabilityOutOfRange : detail::CodedError<5> { using CodedError::CodedError; };
struct HorizonOverflow : detail::CodedError<3> { using CodedError::CodedError; };
struct EmptyCheckpoints : detail::CodedError<3> { using CodedError::CodedError; };
struct WeightVectorNotNormalized : detail::CodedError<3> { using CodedError::CodedError; };

// product/sum oracles
struct BadStartIndex : detail::CodedError<3> { using CodedError::CodedError; };
struct RegimeViolation : detail::CodedError<3> { using CodedError::CodedError; };
struct UnderflowRisk : detail::CodedError<5> { using CodedError::CodedError; };

// covariance assembly
struct GammaOutOfRange : detail::CodedError<3> { using CodedError::CodedError; };
struct WrongRegime : detail::CodedError<3> { using CodedError::CodedError; };
struct ComplexResidue : detail::CodedError<5> { using CodedError::CodedError; };

// inference
struct DegenerateState : detail::CodedError<3> { using CodedError::CodedError; };
struct BadWeightVector : detail::CodedError<3> { using CodedError::CodedError; };

// experiment harness
struct ProxyDegenerate : detail::CodedError<3> { using CodedError::CodedError; };

// config / io
struct ConfigParseError : detail::CodedError<2> { using CodedError::CodedError; };
struct ConfigSemanticError : detail::CodedError<3> { using CodedError::CodedError; };
struct IoError : detail::CodedError<4> { using CodedError::CodedError; };

}

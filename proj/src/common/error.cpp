// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#include "common/error.hpp"

namespace vqar {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Config: return "ConfigError";
        case ErrorCode::Schema: return "SchemaError";
        case ErrorCode::MissingImage: return "MissingImage";
        case ErrorCode::ImageDecode: return "ImageDecodeError";
        case ErrorCode::Transport: return "TransportError";
        case ErrorCode::Backend: return "BackendError";
        case ErrorCode::Unsupported: return "Unsupported";
        case ErrorCode::ScriptMiss: return "ScriptMiss";
        case ErrorCode::Domain: return "DomainError";
        case ErrorCode::MissingLogprobs: return "MissingLogprobs";
        case ErrorCode::Pairing: return "PairingError";
        case ErrorCode::MismatchedRuns: return "MismatchedRuns";
        case ErrorCode::LabelMismatch: return "LabelMismatch";
        case ErrorCode::GateFailure: return "GateFailure";
        case ErrorCode::AnswerFailure: return "AnswerFailure";
        case ErrorCode::Io: return "IoError";
        case ErrorCode::Internal: return "InternalError";
    }
    return "Unknown";
}

}  // namespace vqar

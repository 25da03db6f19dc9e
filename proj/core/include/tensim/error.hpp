// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tensim {

enum class ErrorKind {
    OutOfMemory,
    InvalidPageSize,
    OutOfBounds,
    UnalignedWrite,
    UnknownCoordinate,
    OutOfBoundsSRAM,
    TooManyPages,
    NotReserved,
    NotWaited,
    NothingToPop,
    NoReservedPage,
    RoleViolation,
    DoubleAcquire,
    ReleaseWithoutAcquire,
    NoSession,
    InvalidSlot,
    UnwrittenSlot,
    Deadlock,
    IndivisibleDomain,
    InvalidConfig,
    FitDiverged,
    Io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

}  // namespace tensim

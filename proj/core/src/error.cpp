// SPDX-License-Identifier: Apache-2.0
#include "tensim/error.hpp"

namespace tensim {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::OutOfMemory: return "OutOfMemory";
        case ErrorKind::InvalidPageSize: return "InvalidPageSize";
        case ErrorKind::OutOfBounds: return "OutOfBounds";
        case ErrorKind::UnalignedWrite: return "UnalignedWrite";
        case ErrorKind::UnknownCoordinate: return "UnknownCoordinate";
        case ErrorKind::OutOfBoundsSRAM: return "OutOfBoundsSRAM";
        case ErrorKind::TooManyPages: return "TooManyPages";
        case ErrorKind::NotReserved: return "NotReserved";
        case ErrorKind::NotWaited: return "NotWaited";
        case ErrorKind::NothingToPop: return "NothingToPop";
        case ErrorKind::NoReservedPage: return "NoReservedPage";
        case ErrorKind::RoleViolation: return "RoleViolation";
        case ErrorKind::DoubleAcquire: return "DoubleAcquire";
        case ErrorKind::ReleaseWithoutAcquire: return "ReleaseWithoutAcquire";
        case ErrorKind::NoSession: return "NoSession";
        case ErrorKind::InvalidSlot: return "InvalidSlot";
        case ErrorKind::UnwrittenSlot: return "UnwrittenSlot";
        case ErrorKind::Deadlock: return "Deadlock";
        case ErrorKind::IndivisibleDomain: return "IndivisibleDomain";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::FitDiverged: return "FitDiverged";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

}  // namespace tensim

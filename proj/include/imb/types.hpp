#pragma once

#include <cstdint>

namespace imb {

using Key = std::uint64_t;
using Value = std::uint64_t;

enum class RequestKind : std::uint8_t {
    Read = 0,
    Update = 1,
    Insert = 2,
    Delete = 3,
};

// One operation against an index. `value` is meaningful for Update and
// Insert; Read and Delete carry 0 in it.
struct Request {
    RequestKind kind;
    Key key;
    Value value;
};

enum class OpStatus : std::uint8_t {
    Ok,
    AlreadyExists,
    NotFound,
};

inline const char* to_string(RequestKind k) {
    switch (k) {
        case RequestKind::Read: return "read";
        case RequestKind::Update: return "update";
        case RequestKind::Insert: return "insert";
        case RequestKind::Delete: return "delete";
    }
    return "?";
}

inline const char* to_string(OpStatus s) {
    switch (s) {
        case OpStatus::Ok: return "ok";
        case OpStatus::AlreadyExists: return "already_exists";
        case OpStatus::NotFound: return "not_found";
    }
    return "?";
}

}  // namespace imb

#pragma once

#include <string>

#include "peeropt/triplet.hpp"
#include "peeropt/verify.hpp"

namespace peeropt {

/// Serialize the double-precision face of a triplet (exact-rational source
/// tables are an internal detail and are not emitted).  Keys are sorted and
/// doubles use shortest round-trip form, so dump -> parse -> dump is
/// byte-identical.
std::string triplet_to_json(const PeerTriplet& t);

/// Parse a triplet dump.  Throws std::runtime_error on missing fields, shape
/// mismatches, or unknown keys.
PeerTriplet triplet_from_json(const std::string& text);

/// Serialize a verification report.
std::string report_to_json(const TripletReport& rep);

}  // namespace peeropt

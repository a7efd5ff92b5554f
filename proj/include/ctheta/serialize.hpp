// Conversions between the ball types and external representations: decimal
// strings (inexact, parsed with a certified half-ulp radius) and JSON with
// hex dyadics (bit exact).

#pragma once

#include <string>

#include <json.hpp>

#include "ctheta/ball.hpp"
#include "ctheta/borchardt.hpp"

namespace ctheta {

// Parse a decimal string ("-1.25e-3" style) to `bits` significant bits,
// reporting the rounding displacement. Throws std::invalid_argument when the
// string is not entirely a number.
Rounded dyadic_from_decimal(const std::string& s, Precision bits);

// Ball containing the complex number re + im*i described by two decimal
// strings; radius covers both parse displacements.
ComplexBall ball_from_decimal(const std::string& re, const std::string& im, Precision bits);

// JSON form {"re": hex, "im": hex, "rad": hex}; round trips bit exactly.
nlohmann::json ball_to_json(const ComplexBall& b);
ComplexBall ball_from_json(const nlohmann::json& j);

// Recorded square-root choices as {"steps": [{"t": [...], "v": [...]}]},
// each anchor a ball object; "v" is omitted for plain sequences. Round
// trips bit exactly.
nlohmann::json sign_path_to_json(const SignPath& path);
SignPath sign_path_from_json(const nlohmann::json& j);

}  // namespace ctheta

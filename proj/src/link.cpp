#include "ratefactor/link.hpp"

#include <cmath>

#include "ratefactor/types.hpp"

namespace ratefactor {

Link link_from_string(const std::string& name) {
  if (name == "identity") return Link::identity;
  if (name == "log") return Link::log;
  if (name == "sqrt") return Link::sqrt;
  throw input_error("unknown link '" + name +
                    "' (expected identity, log, or sqrt)");
}

std::string to_string(Link link) {
  switch (link) {
    case Link::identity:
      return "identity";
    case Link::log:
      return "log";
    case Link::sqrt:
      return "sqrt";
  }
  throw input_error("invalid link value");
}

double link_forward(Link link, double rate) {
  switch (link) {
    case Link::identity:
      return rate;
    case Link::log:
      if (rate <= 0.0) throw input_error("log link requires rate > 0");
      return std::log(rate);
    case Link::sqrt:
      if (rate < 0.0) throw input_error("sqrt link requires rate >= 0");
      return std::sqrt(rate);
  }
  throw input_error("invalid link value");
}

double link_inverse(Link link, double eta) {
  double rate = 0.0;
  switch (link) {
    case Link::identity:
      rate = eta;
      break;
    case Link::log:
      rate = std::exp(eta);
      break;
    case Link::sqrt:
      rate = eta * eta;
      break;
  }
  return rate < kRateFloor ? kRateFloor : rate;
}

double link_inverse_deriv(Link link, double eta) {
  switch (link) {
    case Link::identity:
      return 1.0;
    case Link::log:
      return std::exp(eta);
    case Link::sqrt:
      return 2.0 * eta;
  }
  throw input_error("invalid link value");
}

double link_zero_shift(Link link) {
  switch (link) {
    case Link::identity:
      return kRateFloor;
    case Link::log:
      return 0.5;
    case Link::sqrt:
      return 0.25;
  }
  throw input_error("invalid link value");
}

}  // namespace ratefactor

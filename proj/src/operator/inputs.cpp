#include "tod/operator/inputs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tod/core/error.hpp"

namespace tod::op {

void InputSample::validate() const {
  for (std::size_t i = 0; i < axes.size(); ++i)
    if (!std::isfinite(axes[i]) || axes[i] < -1.0 || axes[i] > 1.0)
      throw Error(ErrorCode::Validation, "input axis " + std::to_string(i) + " outside [-1, 1]");
}

void InputMapping::validate() const {
  if (device.empty()) throw Error(ErrorCode::Validation, "mapping.device is empty");
  if (!(dead_zone >= 0.0 && dead_zone <= 0.2)) throw Error(ErrorCode::Validation, "mapping.dead_zone must be in [0, 0.2]");
  if (steering.axis < 0) throw Error(ErrorCode::Validation, "mapping.steering is unbound");
  if (velocity.axis < 0) throw Error(ErrorCode::Validation, "mapping.velocity is unbound");
  if (steering.axis == velocity.axis) throw Error(ErrorCode::Validation, "steering and velocity share an axis");
  for (const auto* b : {&steering, &velocity})
    if (!(b->scale > 0.0) || !(b->exponent > 0.0))
      throw Error(ErrorCode::Validation, "mapping scale and exponent must be > 0");
  std::set<int> used;
  for (int b : {gear_up, gear_down, indicator_left, indicator_right, hazard, estop}) {
    if (b < -1) throw Error(ErrorCode::Validation, "button index must be >= 0 or -1 for unbound");
    if (b >= 0 && !used.insert(b).second)
      throw Error(ErrorCode::Validation, "button " + std::to_string(b) + " is bound twice");
  }
}

void InputMapping::validate_for(std::size_t axis_count, std::size_t button_count) const {
  validate();
  if (static_cast<std::size_t>(std::max(steering.axis, velocity.axis)) >= axis_count)
    throw Error(ErrorCode::Validation, "mapping uses an axis the device does not have");
  for (int b : {gear_up, gear_down, indicator_left, indicator_right, hazard, estop})
    if (b >= 0 && static_cast<std::size_t>(b) >= button_count)
      throw Error(ErrorCode::Validation, "mapping uses a button the device does not have");
}

InputMapping parse_input_mapping(const std::string& text) {
  InputMapping m;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw Error(ErrorCode::Parse, "mapping line " + std::to_string(lineno) + ": " + why);
    };
    auto number = [&](std::size_t i) {
      if (i >= tok.size()) fail("missing value");
      try {
        std::size_t used = 0;
        double v = std::stod(tok[i], &used);
        if (used != tok[i].size()) throw std::invalid_argument(tok[i]);
        return v;
      } catch (const std::exception&) {
        fail("'" + tok[i] + "' is not a number");
      }
      return 0.0;
    };
    auto index = [&](std::size_t i) {
      const double v = number(i);
      if (v != std::floor(v) || v < 0 || v > 255) fail("index must be a small non-negative integer");
      return static_cast<int>(v);
    };
    const std::string& key = tok[0];
    if (!seen.insert(key).second) fail("'" + key + "' bound twice");
    if (key == "device") {
      if (tok.size() != 2) fail("device takes one name");
      m.device = tok[1];
    } else if (key == "dead_zone") {
      m.dead_zone = number(1);
    } else if (key == "steering" || key == "velocity") {
      AxisBinding& b = key == "steering" ? m.steering : m.velocity;
      if (tok.size() < 3 || tok[1] != "axis") fail(key + " needs 'axis <i>'");
      b.axis = index(2);
      for (std::size_t i = 3; i < tok.size(); i += 2) {
        if (tok[i] == "scale") b.scale = number(i + 1);
        else if (tok[i] == "invert") b.invert = number(i + 1) != 0.0;
        else if (tok[i] == "exponent") b.exponent = number(i + 1);
        else fail("unknown option '" + tok[i] + "'");
      }
    } else {
      int* slot = nullptr;
      if (key == "gear_up") slot = &m.gear_up;
      else if (key == "gear_down") slot = &m.gear_down;
      else if (key == "indicator_left") slot = &m.indicator_left;
      else if (key == "indicator_right") slot = &m.indicator_right;
      else if (key == "hazard") slot = &m.hazard;
      else if (key == "estop") slot = &m.estop;
      else fail("unknown signal '" + key + "'");
      if (tok.size() == 2 && tok[1] == "none") {
        *slot = -1;
      } else {
        if (tok.size() != 3 || tok[1] != "button") fail(key + " needs 'button <i>'");
        *slot = index(2);
      }
    }
  }
  m.validate();
  return m;
}

InputMapping load_input_mapping(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot read mapping file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_input_mapping(ss.str());
}

double apply_dead_zone(double value, double dead_zone) noexcept {
  const double a = std::abs(value);
  if (a <= dead_zone) return 0.0;
  return std::copysign(std::min(1.0, (a - dead_zone) / (1.0 - dead_zone)), value);
}

Gear gear_up(Gear g) noexcept {
  switch (g) {
    case Gear::Park: return Gear::Reverse;
    case Gear::Reverse: return Gear::Neutral;
    default: return Gear::Drive;
  }
}

Gear gear_down(Gear g) noexcept {
  switch (g) {
    case Gear::Drive: return Gear::Neutral;
    case Gear::Neutral: return Gear::Reverse;
    default: return Gear::Park;
  }
}

namespace {

bool pressed(const std::vector<bool>& buttons, int index) {
  return index >= 0 && static_cast<std::size_t>(index) < buttons.size() && buttons[static_cast<std::size_t>(index)];
}

double axis_value(const InputSample& s, int index) {
  if (index < 0 || static_cast<std::size_t>(index) >= s.axes.size()) return 0.0;
  const double v = s.axes[static_cast<std::size_t>(index)];
  return std::isfinite(v) ? std::clamp(v, -1.0, 1.0) : 0.0;
}

Indicator toggle(Indicator current, Indicator target) { return current == target ? Indicator::Off : target; }

}  // namespace

std::pair<PrimaryCommand, SecondaryCommand> map_inputs(const InputSample& sample, const InputMapping& mapping,
                                                       const VehicleParams& params, const SecondaryCommand& previous,
                                                       const std::vector<bool>& previous_buttons) {
  auto edge = [&](int index) { return pressed(sample.buttons, index) && !pressed(previous_buttons, index); };

  SecondaryCommand sc = previous;
  if (edge(mapping.gear_up)) sc.gear = gear_up(sc.gear);
  if (edge(mapping.gear_down)) sc.gear = gear_down(sc.gear);
  if (edge(mapping.indicator_left)) sc.indicator = toggle(sc.indicator, Indicator::Left);
  if (edge(mapping.indicator_right)) sc.indicator = toggle(sc.indicator, Indicator::Right);
  if (edge(mapping.hazard)) sc.indicator = toggle(sc.indicator, Indicator::Hazard);
  if (edge(mapping.estop)) sc.estop_engaged = !sc.estop_engaged;
  sc.stamp_ns = sample.stamp_ns;

  PrimaryCommand pc;
  double steer = apply_dead_zone(axis_value(sample, mapping.steering.axis), mapping.dead_zone);
  if (mapping.steering.invert) steer = -steer;
  pc.desired_swa = std::clamp(steer * mapping.steering.scale, -1.0, 1.0) * params.max_swa;

  const double throttle = axis_value(sample, mapping.velocity.axis);
  double speed = 0.0;
  if (throttle > mapping.dead_zone) {
    const double shaped = std::pow((throttle - mapping.dead_zone) / (1.0 - mapping.dead_zone), mapping.velocity.exponent);
    speed = std::clamp(shaped * mapping.velocity.scale, 0.0, 1.0) * params.max_speed;
  }
  pc.desired_velocity = sc.gear == Gear::Drive ? speed : (sc.gear == Gear::Reverse ? -speed : 0.0);
  if (pc.desired_velocity == 0.0) pc.desired_velocity = 0.0;  // no negative zero on the wire
  pc.stamp_ns = sample.stamp_ns;
  return {pc, sc};
}

InputMapper::InputMapper(InputMapping mapping, VehicleParams params)
    : mapping_(std::move(mapping)), params_(params) {
  mapping_.validate();
}

std::optional<std::pair<PrimaryCommand, SecondaryCommand>> InputMapper::map(const InputSample& sample,
                                                                            std::uint64_t now_ns) {
  if (sample.device != mapping_.device) return std::nullopt;
  auto [pc, sc] = map_inputs(sample, mapping_, params_, secondary_, prev_buttons_);
  prev_buttons_ = sample.buttons;
  pc.stamp_ns = sc.stamp_ns = now_ns;
  pc.seq = ++primary_seq_;
  sc.seq = ++secondary_seq_;
  secondary_ = sc;
  return std::pair{pc, sc};
}

}  // namespace tod::op

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tod/core/types.hpp"

namespace tod::op {

struct InputSample {
  std::string device;
  std::vector<double> axes;  // each in [-1, 1]
  std::vector<bool> buttons;
  std::uint64_t stamp_ns = 0;

  /// Throws Error(Validation) for non-finite or out-of-range axes.
  void validate() const;
};

struct AxisBinding {
  int axis = -1;
  double scale = 1.0;
  bool invert = false;
  double exponent = 1.0;  // velocity shaping
};

/// Assignment of device axes and buttons to command signals. A button index
/// of -1 leaves the signal unbound.
struct InputMapping {
  std::string device = "virtual";
  double dead_zone = 0.05;
  AxisBinding steering{0};
  AxisBinding velocity{1};
  int gear_up = 0;
  int gear_down = 1;
  int indicator_left = 2;
  int indicator_right = 3;
  int hazard = -1;
  int estop = 4;

  /// Throws Error(Validation) on a dead zone outside [0, 0.2], unbound axes,
  /// a button bound twice or non-positive scale/exponent.
  void validate() const;
  /// Also checks every bound index against the device capability.
  void validate_for(std::size_t axis_count, std::size_t button_count) const;
};

/// Text form, one binding per line:
///   device <name>
///   dead_zone <v>
///   steering axis <i> [scale <s>] [invert 0|1]
///   velocity axis <i> [scale <s>] [exponent <e>]
///   gear_up|gear_down|indicator_left|indicator_right|hazard|estop button <i>
/// Throws Error(Parse) with the line number.
InputMapping parse_input_mapping(const std::string& text);
InputMapping load_input_mapping(const std::string& path);

/// Dead-zone rescaling of one axis value into [-1, 1].
double apply_dead_zone(double value, double dead_zone) noexcept;

Gear gear_up(Gear g) noexcept;
Gear gear_down(Gear g) noexcept;

/// Command creation from raw samples. Buttons act on rising edges; both
/// commands carry their own increasing sequence numbers.
class InputMapper {
 public:
  InputMapper(InputMapping mapping, VehicleParams params);

  /// nullopt when the sample is not from the mapped device.
  std::optional<std::pair<PrimaryCommand, SecondaryCommand>> map(const InputSample& sample, std::uint64_t now_ns);

  const SecondaryCommand& secondary() const noexcept { return secondary_; }
  void set_secondary(const SecondaryCommand& s) { secondary_ = s; }
  const InputMapping& mapping() const noexcept { return mapping_; }

 private:
  InputMapping mapping_;
  VehicleParams params_;
  std::vector<bool> prev_buttons_;
  SecondaryCommand secondary_;
  std::uint32_t primary_seq_ = 0;
  std::uint32_t secondary_seq_ = 0;
};

/// Stateless form: maps one sample given the previous secondary command and
/// previous button states.
std::pair<PrimaryCommand, SecondaryCommand> map_inputs(const InputSample& sample, const InputMapping& mapping,
                                                       const VehicleParams& params, const SecondaryCommand& previous,
                                                       const std::vector<bool>& previous_buttons);

}  // namespace tod::op

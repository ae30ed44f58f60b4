#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tod/perception/stream.hpp"

namespace tod::op {

enum class SessionPhase : std::uint8_t { Idle, Configured, Connected, Teleoperating, ConnectionLost };
enum class ControlMode : std::uint8_t { DirectControl };

enum class ManagerEventType : std::uint8_t {
  SetEndpoints,
  Connect,
  ConnectAck,
  Start,
  Stop,
  Disconnect,
  ControlChannelLost,
  SelectInputDevice,
  SelectControlMode,
  SelectVideoRateMode,
};

inline constexpr std::array kAllPhases{SessionPhase::Idle, SessionPhase::Configured, SessionPhase::Connected,
                                       SessionPhase::Teleoperating, SessionPhase::ConnectionLost};
inline constexpr std::array kAllEventTypes{
    ManagerEventType::SetEndpoints,      ManagerEventType::Connect,           ManagerEventType::ConnectAck,
    ManagerEventType::Start,             ManagerEventType::Stop,              ManagerEventType::Disconnect,
    ManagerEventType::ControlChannelLost, ManagerEventType::SelectInputDevice, ManagerEventType::SelectControlMode,
    ManagerEventType::SelectVideoRateMode};

std::string_view to_string(SessionPhase p) noexcept;
std::string_view to_string(ManagerEventType e) noexcept;
std::string_view to_string(ControlMode m) noexcept;
bool parse_event_type(std::string_view text, ManagerEventType& out) noexcept;
bool parse_control_mode(std::string_view text, ControlMode& out) noexcept;

struct ManagerEvent {
  ManagerEventType type = ManagerEventType::Connect;
  std::string vehicle_endpoint;   // SetEndpoints
  std::string operator_endpoint;  // SetEndpoints
  std::string device;             // SelectInputDevice
  ControlMode control_mode = ControlMode::DirectControl;
  perception::StreamMode video_rate_mode = perception::StreamMode::Manual;
};

struct SessionState {
  SessionPhase phase = SessionPhase::Idle;
  std::string vehicle_endpoint;
  std::string operator_endpoint;
  std::optional<std::string> active_input_device;
  ControlMode control_mode = ControlMode::DirectControl;
  perception::StreamMode video_rate_mode = perception::StreamMode::Manual;
  bool handshake_pending = false;

  // Selections wait here until the next command cycle.
  std::optional<std::string> pending_input_device;
  std::optional<ControlMode> pending_control_mode;
  std::optional<perception::StreamMode> pending_video_rate_mode;

  bool operator==(const SessionState&) const = default;
};

enum class ManagerAction : std::uint8_t { OpenControlChannel, CloseControlChannel, StartDispatch, StopDispatch };

struct Transition {
  SessionState state;
  std::vector<ManagerAction> actions;
  bool accepted = false;
  std::string reason;  // set when rejected
};

/// Pure session state machine. Rejected events return the input state
/// unchanged together with a reason.
Transition manager_transition(const SessionState& s, const ManagerEvent& e);

/// True for the (phase, event) pairs that have a transition at all, before
/// guards are considered.
bool transition_defined(SessionPhase phase, ManagerEventType event) noexcept;

/// Commits pending selections; called at each command cycle.
SessionState apply_pending(SessionState s);

}  // namespace tod::op

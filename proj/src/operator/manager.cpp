#include "tod/operator/manager.hpp"

namespace tod::op {

std::string_view to_string(SessionPhase p) noexcept {
  switch (p) {
    case SessionPhase::Idle: return "idle";
    case SessionPhase::Configured: return "configured";
    case SessionPhase::Connected: return "connected";
    case SessionPhase::Teleoperating: return "teleoperating";
    case SessionPhase::ConnectionLost: return "connection_lost";
  }
  return "?";
}

std::string_view to_string(ManagerEventType e) noexcept {
  switch (e) {
    case ManagerEventType::SetEndpoints: return "set_endpoints";
    case ManagerEventType::Connect: return "connect";
    case ManagerEventType::ConnectAck: return "connect_ack";
    case ManagerEventType::Start: return "start";
    case ManagerEventType::Stop: return "stop";
    case ManagerEventType::Disconnect: return "disconnect";
    case ManagerEventType::ControlChannelLost: return "control_channel_lost";
    case ManagerEventType::SelectInputDevice: return "select_input_device";
    case ManagerEventType::SelectControlMode: return "select_control_mode";
    case ManagerEventType::SelectVideoRateMode: return "select_video_rate_mode";
  }
  return "?";
}

std::string_view to_string(ControlMode) noexcept { return "direct"; }

bool parse_event_type(std::string_view text, ManagerEventType& out) noexcept {
  for (auto e : kAllEventTypes) {
    if (to_string(e) == text) {
      out = e;
      return true;
    }
  }
  return false;
}

bool parse_control_mode(std::string_view text, ControlMode& out) noexcept {
  if (text != "direct") return false;
  out = ControlMode::DirectControl;
  return true;
}

bool transition_defined(SessionPhase phase, ManagerEventType event) noexcept {
  using P = SessionPhase;
  using E = ManagerEventType;
  const bool live = phase == P::Connected || phase == P::Teleoperating;
  switch (event) {
    case E::SetEndpoints: return phase == P::Idle;
    case E::Connect:
    case E::ConnectAck: return phase == P::Configured;
    case E::Start: return phase == P::Connected;
    case E::Stop: return phase == P::Teleoperating;
    case E::Disconnect: return phase == P::ConnectionLost;
    case E::ControlChannelLost:
    case E::SelectInputDevice:
    case E::SelectControlMode:
    case E::SelectVideoRateMode: return live;
  }
  return false;
}

namespace {

Transition reject(const SessionState& s, std::string reason) { return {s, {}, false, std::move(reason)}; }

Transition accept(SessionState s, std::vector<ManagerAction> actions = {}) { return {std::move(s), std::move(actions), true, {}}; }

}  // namespace

Transition manager_transition(const SessionState& s, const ManagerEvent& e) {
  if (!transition_defined(s.phase, e.type))
    return reject(s, std::string(to_string(e.type)) + " is not allowed while " + std::string(to_string(s.phase)));

  SessionState n = s;
  switch (e.type) {
    case ManagerEventType::SetEndpoints:
      if (e.vehicle_endpoint.empty() || e.operator_endpoint.empty())
        return reject(s, "both endpoints are required");
      n.vehicle_endpoint = e.vehicle_endpoint;
      n.operator_endpoint = e.operator_endpoint;
      n.phase = SessionPhase::Configured;
      return accept(n);
    case ManagerEventType::Connect:
      n.handshake_pending = true;
      return accept(n, {ManagerAction::OpenControlChannel});
    case ManagerEventType::ConnectAck:
      if (!s.handshake_pending) return reject(s, "no handshake in progress");
      n.handshake_pending = false;
      n.phase = SessionPhase::Connected;
      return accept(n);
    case ManagerEventType::Start:
      if (!s.active_input_device && !s.pending_input_device) return reject(s, "no input device selected");
      n = apply_pending(n);
      n.phase = SessionPhase::Teleoperating;
      return accept(n, {ManagerAction::StartDispatch});
    case ManagerEventType::Stop:
      n.phase = SessionPhase::Connected;
      return accept(n, {ManagerAction::StopDispatch});
    case ManagerEventType::ControlChannelLost: {
      const bool was_driving = s.phase == SessionPhase::Teleoperating;
      n.phase = SessionPhase::ConnectionLost;
      return accept(n, was_driving ? std::vector{ManagerAction::StopDispatch} : std::vector<ManagerAction>{});
    }
    case ManagerEventType::Disconnect:
      n.phase = SessionPhase::Configured;
      n.handshake_pending = false;
      return accept(n, {ManagerAction::CloseControlChannel});
    case ManagerEventType::SelectInputDevice:
      if (e.device.empty()) return reject(s, "device name is empty");
      n.pending_input_device = e.device;
      return accept(n);
    case ManagerEventType::SelectControlMode:
      n.pending_control_mode = e.control_mode;
      return accept(n);
    case ManagerEventType::SelectVideoRateMode:
      n.pending_video_rate_mode = e.video_rate_mode;
      return accept(n);
  }
  return reject(s, "unhandled event");
}

SessionState apply_pending(SessionState s) {
  if (s.pending_input_device) s.active_input_device = std::move(s.pending_input_device);
  if (s.pending_control_mode) s.control_mode = *s.pending_control_mode;
  if (s.pending_video_rate_mode) s.video_rate_mode = *s.pending_video_rate_mode;
  s.pending_input_device.reset();
  s.pending_control_mode.reset();
  s.pending_video_rate_mode.reset();
  return s;
}

}  // namespace tod::op

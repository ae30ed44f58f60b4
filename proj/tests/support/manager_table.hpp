#pragma once

// Expected session transitions, written out by hand.

#include <map>

#include "tod/operator/manager.hpp"

namespace tod::testing {

inline const std::map<std::pair<op::SessionPhase, op::ManagerEventType>, op::SessionPhase> kManagerTable = [] {
  using P = op::SessionPhase;
  using E = op::ManagerEventType;
  return std::map<std::pair<P, E>, P>{
      {{P::Idle, E::SetEndpoints}, P::Configured},
      {{P::Configured, E::Connect}, P::Configured},
      {{P::Configured, E::ConnectAck}, P::Connected},
      {{P::Connected, E::Start}, P::Teleoperating},
      {{P::Teleoperating, E::Stop}, P::Connected},
      {{P::Connected, E::ControlChannelLost}, P::ConnectionLost},
      {{P::Teleoperating, E::ControlChannelLost}, P::ConnectionLost},
      {{P::ConnectionLost, E::Disconnect}, P::Configured},
      {{P::Connected, E::SelectInputDevice}, P::Connected},
      {{P::Teleoperating, E::SelectInputDevice}, P::Teleoperating},
      {{P::Connected, E::SelectControlMode}, P::Connected},
      {{P::Teleoperating, E::SelectControlMode}, P::Teleoperating},
      {{P::Connected, E::SelectVideoRateMode}, P::Connected},
      {{P::Teleoperating, E::SelectVideoRateMode}, P::Teleoperating},
  };
}();

// A state in `phase` that satisfies every guard.
inline op::SessionState ready_state(op::SessionPhase phase) {
  op::SessionState s;
  s.phase = phase;
  s.vehicle_endpoint = "10.0.0.2:7000";
  s.operator_endpoint = "10.0.0.1:7001";
  s.active_input_device = "virtual";
  s.handshake_pending = phase == op::SessionPhase::Configured;
  return s;
}

inline op::ManagerEvent full_event(op::ManagerEventType type) {
  op::ManagerEvent e;
  e.type = type;
  e.vehicle_endpoint = "10.0.0.2:7000";
  e.operator_endpoint = "10.0.0.1:7001";
  e.device = "virtual";
  e.video_rate_mode = perception::StreamMode::Automatic;
  return e;
}

}  // namespace tod::testing

// View state and its reducer.  The cockpit is a pure view/controller: this
// module only folds server events into what the panels render; all routing,
// search and localization live behind the API.

import { TraceEvent } from "./events.js";

export interface TranscriptEntry {
  speaker: "user" | "assistant" | "system";
  text: string;
  cues: string[];
}

export interface Pose {
  x: number;
  y: number;
  heading: string;
}

export interface Latencies {
  capture_s: number;
  transcribe_s: number;
  process_s: number;
  synthesize_s: number;
}

export interface ViewState {
  stage: string;
  pose: Pose | null;
  bumped: boolean;
  route: { x: number; y: number }[];
  transcript: TranscriptEntry[];
  pendingCues: string[];
  latencies: Latencies | null;
  connected: boolean;
}

export function initialState(): ViewState {
  return {
    stage: "Listening",
    pose: null,
    bumped: false,
    route: [],
    transcript: [],
    pendingCues: [],
    latencies: null,
    connected: false,
  };
}

export function reduce(state: ViewState, event: TraceEvent): ViewState {
  switch (event.kind) {
    case "StateChanged": {
      const next = { ...state, stage: event.stage };
      // a new response cycle begins: stale route overlay comes down
      if (event.stage === "Capturing") next.route = [];
      return next;
    }
    case "CueRecordingStarted":
      return { ...state, pendingCues: [...state.pendingCues, "rec"] };
    case "CueProcessing":
      return { ...state, pendingCues: [...state.pendingCues, "busy"] };
    case "ImagesCaptured":
      return { ...state, pendingCues: [...state.pendingCues, `cam x${event.count}`] };
    case "Transcript":
      return appendEntry(state, { speaker: "user", text: event.text, cues: drain(state) });
    case "SpeechSegment":
      return appendEntry(state, { speaker: "assistant", text: event.text, cues: drain(state) });
    case "PoseChanged":
      return {
        ...state,
        pose: { x: event.x, y: event.y, heading: event.heading },
        bumped: event.bumped,
      };
  }
}

function drain(state: ViewState): string[] {
  return state.pendingCues;
}

function appendEntry(state: ViewState, entry: TranscriptEntry): ViewState {
  return { ...state, transcript: [...state.transcript, entry], pendingCues: [] };
}

export function controlsEnabled(state: ViewState): boolean {
  // mirror the queueing contract: no sends while the assistant is speaking
  return state.stage !== "Speaking";
}

export function setRoute(state: ViewState, route: { x: number; y: number }[]): ViewState {
  return { ...state, route };
}

export function setLatencies(state: ViewState, latencies: Latencies): ViewState {
  return { ...state, latencies };
}

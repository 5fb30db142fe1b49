// Parses the service's line-oriented event format (one line per SSE message).
// The format mirrors the backend trace files exactly: `EventName key=value ...`
// with free text JSON-quoted.

export type TraceEvent =
  | { kind: "StateChanged"; stage: string }
  | { kind: "CueRecordingStarted" }
  | { kind: "CueProcessing" }
  | { kind: "Transcript"; text: string }
  | { kind: "ImagesCaptured"; count: number }
  | { kind: "SpeechSegment"; seq: number; text: string }
  | { kind: "PoseChanged"; x: number; y: number; heading: string; bumped: boolean };

export function parseEventLine(line: string): TraceEvent | null {
  const trimmed = line.trim();
  const space = trimmed.indexOf(" ");
  const name = space === -1 ? trimmed : trimmed.slice(0, space);
  const rest = space === -1 ? "" : trimmed.slice(space + 1);
  switch (name) {
    case "StateChanged":
      return { kind: "StateChanged", stage: expectField(rest, "stage") };
    case "CueRecordingStarted":
      return { kind: "CueRecordingStarted" };
    case "CueProcessing":
      return { kind: "CueProcessing" };
    case "Transcript":
      return { kind: "Transcript", text: jsonField(rest, "text") };
    case "ImagesCaptured":
      return { kind: "ImagesCaptured", count: Number(expectField(rest, "count")) };
    case "SpeechSegment":
      return {
        kind: "SpeechSegment",
        seq: Number(expectField(rest, "seq")),
        text: jsonField(rest, "text"),
      };
    case "PoseChanged":
      return {
        kind: "PoseChanged",
        x: Number(expectField(rest, "x")),
        y: Number(expectField(rest, "y")),
        heading: expectField(rest, "heading"),
        bumped: rest.includes("bumped=true"),
      };
    default:
      return null; // forward compatible: unknown events are ignored
  }
}

function expectField(rest: string, key: string): string {
  const match = rest.match(new RegExp(`(?:^|\\s)${key}=([^\\s]+)`));
  if (!match) throw new Error(`missing field ${key} in: ${rest}`);
  return match[1];
}

function jsonField(rest: string, key: string): string {
  const marker = `${key}=`;
  const at = rest.indexOf(marker);
  if (at === -1) throw new Error(`missing field ${key} in: ${rest}`);
  return JSON.parse(rest.slice(at + marker.length)) as string;
}

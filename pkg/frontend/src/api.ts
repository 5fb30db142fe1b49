// Thin typed wrappers over the service endpoints.

export interface Layout {
  width: number;
  height: number;
  rows: string[];
  aisle_columns: number[];
  shelves: {
    shelf_id: string;
    section: string;
    cell: { x: number; y: number };
    approach: { x: number; y: number };
    facing: string;
  }[];
  markers: { marker_id: number; shelf_id: string }[];
}

export interface InteractionResponse {
  trigger: string;
  kind: string;
  spoken_text: string;
  segments: string[];
  route: { x: number; y: number }[] | null;
  instruction_texts: string[];
  latencies: { capture_s: number; transcribe_s: number; process_s: number; synthesize_s: number };
}

export interface MoveResponse {
  pose: { x: number; y: number; heading: string };
  bumped: boolean;
}

const base = "";

async function postJson<T>(path: string, body: unknown): Promise<T> {
  const response = await fetch(base + path, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!response.ok) throw new Error(`${path} failed: ${response.status}`);
  return (await response.json()) as T;
}

export function fetchLayout(): Promise<Layout> {
  return fetch(base + "/store/layout").then((r) => r.json());
}

export function fetchState(): Promise<{ pose: { x: number; y: number; heading: string } }> {
  return fetch(base + "/state").then((r) => r.json());
}

export function sendMove(command: string): Promise<MoveResponse> {
  return postJson("/move", { command });
}

export function sendButton(variant: string): Promise<InteractionResponse> {
  return postJson("/button", { variant });
}

export function sendUtterance(text: string): Promise<InteractionResponse> {
  return postJson("/utterance", { text });
}

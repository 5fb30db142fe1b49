// Keyboard and button input mapped to API calls.

export const KEY_COMMANDS: Record<string, string> = {
  ArrowUp: "MoveForward",
  ArrowLeft: "RotateLeft",
  ArrowRight: "RotateRight",
};

export const BUTTON_VARIANTS = [
  "EnvironmentDescription",
  "VoiceCommand",
  "SectionDescription",
] as const;

export function commandForKey(key: string): string | null {
  return KEY_COMMANDS[key] ?? null;
}

// Fixed color scheme. Viewpoint kinds: needs blue, approach yellow,
// benefit green, competition red. Domains draw from a separate palette
// assigned by sorted code so the legend is stable across reloads.

import type { Nabc } from "./types.js";

export const NABC_COLORS: Record<Nabc, string> = {
  N: "#339af0",
  A: "#fab005",
  B: "#40c057",
  C: "#fa5252",
};

export const NABC_LABELS: Record<Nabc, string> = {
  N: "Need",
  A: "Approach",
  B: "Benefit",
  C: "Competition",
};

const DOMAIN_PALETTE = [
  "#4c6ef5",
  "#12b886",
  "#e64980",
  "#f76707",
  "#7950f2",
  "#0ca678",
  "#d6336c",
  "#1c7ed6",
];

export function domainColors(codes: Iterable<string>): Map<string, string> {
  const sorted = [...new Set(codes)].sort();
  const assigned = new Map<string, string>();
  sorted.forEach((code, i) => {
    assigned.set(code, DOMAIN_PALETTE[i % DOMAIN_PALETTE.length]);
  });
  return assigned;
}

export const STATUS_STYLES: Record<string, { dashed: boolean; opacity: number }> = {
  proposed: { dashed: true, opacity: 0.6 },
  accepted: { dashed: false, opacity: 1.0 },
  rejected: { dashed: true, opacity: 0.25 },
};

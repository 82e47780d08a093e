/**
 * CloudChunk reassembly. A revision is exposed only once every chunk
 * (seq 0..total-1) has arrived; partial reassemblies are never rendered.
 */

import type { CloudChunkMsg } from "./protocol";

export interface AssembledCloud {
  sessionId: number;
  revision: number;
  points: [number, number, number][];
  colors: [number, number, number][] | null;
}

interface Pending {
  total: number;
  chunks: Map<number, CloudChunkMsg>;
}

export class ChunkAssembler {
  private pending = new Map<string, Pending>();

  /** Feed one chunk; returns the full cloud when its revision completes. */
  add(chunk: CloudChunkMsg): AssembledCloud | null {
    const key = `${chunk.session_id}:${chunk.revision}`;
    let entry = this.pending.get(key);
    if (!entry || entry.total !== chunk.total) {
      entry = { total: chunk.total, chunks: new Map() };
      this.pending.set(key, entry);
    }
    entry.chunks.set(chunk.seq, chunk);
    if (entry.chunks.size < entry.total) {
      return null;
    }
    const points: [number, number, number][] = [];
    const colors: [number, number, number][] = [];
    let anyColors = false;
    for (let seq = 0; seq < entry.total; seq++) {
      const part = entry.chunks.get(seq);
      if (!part) {
        return null; // duplicate seq filled the count; keep waiting
      }
      points.push(...part.points);
      if (part.colors) {
        anyColors = true;
        colors.push(...part.colors);
      }
    }
    this.pending.delete(key);
    return {
      sessionId: chunk.session_id,
      revision: chunk.revision,
      points,
      colors: anyColors && colors.length === points.length ? colors : null,
    };
  }
}

/** HTTP binding of the DCGW1 protocol (the service multiplexes it on the
 * same port as the binary binding). Only wire-visible data ever arrives:
 * ticket summaries, frames, status, feedback. */

import { DecodedFrame, decodeFrame } from "./dcgf.js";

export interface Ticket {
  session: string;
  game_type: string;
  fps: number;
  object_count: number;
  width: number;
  height: number;
  timeout: number;
}

export interface FramePoll {
  frame: DecodedFrame;
  status: string;
  frameIndex: number;
}

export interface Point {
  x: number;
  y: number;
}

export interface CreateOptions {
  game_type: string;
  fps?: number;
  object_count?: number;
  seed?: number;
  drag_cap?: number;
}

export class ServiceClient {
  constructor(readonly base: string) {}

  private async post(path: string, body: unknown): Promise<any> {
    const res = await fetch(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    const data = await res.json();
    if (!res.ok && data?.error === undefined) {
      throw new Error(`${path}: HTTP ${res.status}`);
    }
    return data;
  }

  async createSession(opts: CreateOptions): Promise<Ticket> {
    const data = await this.post("/api/session", opts);
    if (!data.ok) throw new Error(`create failed: ${data.error}`);
    return data as Ticket;
  }

  async getFrame(session: string): Promise<FramePoll> {
    const res = await fetch(`${this.base}/api/frame?session=${session}`);
    if (!res.ok) throw new Error(`frame failed: HTTP ${res.status}`);
    const frame = decodeFrame(await res.arrayBuffer());
    return {
      frame,
      status: res.headers.get("X-Status") ?? "unknown",
      frameIndex: Number(res.headers.get("X-Frame-Index") ?? -1),
    };
  }

  /** Begin a drag; true if an object was grabbed. */
  async click(session: string, p: Point): Promise<boolean> {
    const data = await this.post("/api/click", {
      session, x: Math.round(p.x), y: Math.round(p.y),
      client_time: Date.now(),
    });
    return Boolean(data.ok && data.grabbed);
  }

  /** Finish the drag; returns star/cross, or null if rejected. */
  async drop(session: string, p: Point): Promise<{ feedback: string; status: string } | null> {
    const data = await this.post("/api/drop", {
      session, x: Math.round(p.x), y: Math.round(p.y),
      client_time: Date.now(),
    });
    if (!data.ok) return null;
    return { feedback: data.feedback, status: data.status };
  }

  /** Ground truth; only answered when the service runs with the
   * experiment flag. Used by harnesses, never by the production UI. */
  async oracle(session: string): Promise<{
    answers: { object_id: number; centroid: [number, number]; target_centroid: [number, number] }[];
    target_region: [number, number, number, number];
    status: string;
  }> {
    const res = await fetch(`${this.base}/api/oracle?session=${session}`);
    const data = await res.json();
    if (!data.ok) throw new Error(`oracle: ${data.error}`);
    return data;
  }
}

export const sleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

/** Direct-play loop: poll frames at the session rate, forward drags,
 * surface feedback and the terminal banner. The view and input source are
 * abstract so the same loop drives the canvas UI and automated tests. */

import { FramePoll, Point, ServiceClient, Ticket, sleep } from "./client.js";

export interface PlayView {
  showFrame(poll: FramePoll): void;
  showStatus(status: string): void;
  showFeedback(kind: string, at: Point): void;
}

export interface DragGesture {
  press: Point;
  release: Point;
}

/** Supplies drag gestures; return null when there is no pending input. */
export interface InputSource {
  nextDrag(): DragGesture | null;
}

export interface PlayResult {
  status: string;
  feedbacks: string[];
  frames: number;
}

const TERMINAL = new Set(["complete", "timed_out", "locked_out"]);

export async function playLoop(
  client: ServiceClient,
  ticket: Ticket,
  view: PlayView,
  input: InputSource,
  opts: { maxMs?: number } = {},
): Promise<PlayResult> {
  const periodMs = 1000 / ticket.fps;
  const deadline = Date.now() + (opts.maxMs ?? (ticket.timeout + 5) * 1000);
  const feedbacks: string[] = [];
  let polls = 0;
  let status = "in_progress";

  while (Date.now() < deadline) {
    const poll = await client.getFrame(ticket.session);
    polls += 1;
    status = poll.status;
    view.showFrame(poll);
    view.showStatus(status);
    if (TERMINAL.has(status)) break;

    const drag = input.nextDrag();
    if (drag) {
      const grabbed = await client.click(ticket.session, drag.press);
      if (grabbed) {
        const result = await client.drop(ticket.session, drag.release);
        if (result) {
          feedbacks.push(result.feedback);
          view.showFeedback(result.feedback, drag.release);
          status = result.status;
          if (TERMINAL.has(status)) {
            view.showStatus(status);
            break;
          }
        }
      }
    }
    await sleep(periodMs);
  }
  return { status, feedbacks, frames: polls };
}

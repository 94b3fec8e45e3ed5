// Durable offline queue for annotation records. Submissions that fail with
// a network error are appended here and replayed in order once the gateway
// is reachable again; the server stays the arbiter (a record it rejects on
// replay is dropped and reported, not retried forever).

import { AnnotationRecord, ApiError, GatewayClient, NetworkError } from "./api.js";

export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

const QUEUE_KEY = "corpusforge.annotation.queue";

export class OfflineQueue {
  constructor(private store: KeyValueStore) {}

  private read(): AnnotationRecord[] {
    const raw = this.store.getItem(QUEUE_KEY);
    if (!raw) return [];
    try {
      return JSON.parse(raw) as AnnotationRecord[];
    } catch {
      return [];
    }
  }

  private write(records: AnnotationRecord[]): void {
    if (records.length === 0) {
      this.store.removeItem(QUEUE_KEY);
    } else {
      this.store.setItem(QUEUE_KEY, JSON.stringify(records));
    }
  }

  get length(): number {
    return this.read().length;
  }

  pending(): AnnotationRecord[] {
    return this.read();
  }

  push(record: AnnotationRecord): void {
    const records = this.read();
    records.push(record);
    this.write(records);
  }

  /**
   * Replay queued records in order. Stops (keeping the remainder) on a
   * network failure; drops records the server rejects, collecting the
   * rejection messages. Returns the number sent and any rejections.
   */
  async flush(client: GatewayClient): Promise<{ sent: number; rejected: string[] }> {
    const records = this.read();
    const rejected: string[] = [];
    let sent = 0;
    while (records.length > 0) {
      const record = records[0];
      try {
        await client.postAnnotation(record);
        sent += 1;
        records.shift();
        this.write(records);
      } catch (err) {
        if (err instanceof NetworkError) {
          break; // still offline; keep the rest for the next reconnect
        }
        if (err instanceof ApiError) {
          rejected.push(`${record.kind} on ${record.segment_id}: ${err.message}`);
          records.shift();
          this.write(records);
          continue;
        }
        throw err;
      }
    }
    return { sent, rejected };
  }
}

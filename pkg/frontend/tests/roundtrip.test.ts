// End-to-end acceptance: a 2-item, 2-system session annotated through the
// UI flow against the real gateway process; the gateway report must equal
// the CLI report over the same store, and no payload the client renders may
// contain a true system identifier.

import { ChildProcess, execFile, spawn } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { GatewayClient } from "../src/api.js";
import { KeyValueStore, OfflineQueue } from "../src/queue.js";
import { SessionFlow } from "../src/state.js";

const execFileP = promisify(execFile);

const PORT = 8700 + Math.floor(Math.random() * 200);
const BASE = `http://127.0.0.1:${PORT}`;
const TRUE_IDS = ["rnn-baseline", "transformer-big"];

let server: ChildProcess;
let dataRoot: string;
const scannedPayloads: string[] = [];

function memoryStore(): KeyValueStore {
  const map = new Map<string, string>();
  return {
    getItem: (k) => map.get(k) ?? null,
    setItem: (k, v) => void map.set(k, v),
    removeItem: (k) => void map.delete(k),
  };
}

// every byte the client receives is recorded for the identity scan
const recordingFetch = async (url: string, init?: RequestInit) => {
  const resp = await fetch(url, init);
  const text = await resp.text();
  scannedPayloads.push(text);
  return new Response(text, { status: resp.status, headers: resp.headers });
};

async function waitForHealth(timeoutMs = 20000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${BASE}/v1/health`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error("gateway did not become healthy");
}

beforeAll(async () => {
  dataRoot = mkdtempSync(join(tmpdir(), "corpusforge-ui-"));
  server = spawn(
    "corpusforge",
    ["serve", "--port", String(PORT), "--data-root", dataRoot],
    { stdio: "ignore" },
  );
  await waitForHealth();
}, 30000);

afterAll(() => {
  server?.kill();
});

describe("annotation round trip against the real gateway", () => {
  it("2 items x 2 systems x 2 annotators; report equals the CLI report", async () => {
    const client = new GatewayClient(BASE, recordingFetch);
    const corpus: Array<[string, string]> = Array.from({ length: 6 }, (_, i) => [
      `source sentence ${i}`,
      `reference translation ${i}`,
    ]);
    const systems: Record<string, string[]> = {
      [TRUE_IDS[0]]: corpus.map((_, i) => `first candidate ${i}`),
      [TRUE_IDS[1]]: corpus.map((_, i) => `second candidate ${i}`),
    };
    const created = await client.createSession({
      corpus,
      systems,
      n: 2,
      seed: 11,
      session_id: "ui-roundtrip",
    });
    expect(created.n_items).toBe(2);

    let judgements = 0;
    for (const annotator of ["annotator-1", "annotator-2"]) {
      const flow = new SessionFlow(
        client,
        "ui-roundtrip",
        annotator,
        new OfflineQueue(memoryStore()),
      );
      await flow.loadTask();
      while (flow.view().phase === "annotating") {
        const item = flow.view().item!;
        for (const output of item.outputs) {
          flow.setLevel(output.label, annotator === "annotator-1" ? 5 : 4);
          judgements += 1;
        }
        if (annotator === "annotator-1") {
          expect(
            flow.addTag(item.outputs[0].label, {
              top: "fluency",
              sub: "grammar",
              severity: "minor",
              span: [0, 5],
            }),
          ).toEqual([]);
        }
        const result = await flow.submit();
        expect(result.ok).toBe(true);
      }
      expect(flow.view().phase).toBe("done");
    }
    expect(judgements).toBe(8);

    // gateway report vs the CLI on the same store
    const apiReport = await client.report("ui-roundtrip");
    const store = join(dataRoot, "sessions");
    const [kappaOut, mqmOut, sqmOut] = await Promise.all([
      execFileP("corpusforge", ["kappa", "--store", store, "--session", "ui-roundtrip"]),
      execFileP("corpusforge", ["mqm-report", "--store", store, "--session", "ui-roundtrip"]),
      execFileP("corpusforge", ["sqm-report", "--store", store, "--session", "ui-roundtrip"]),
    ]);
    expect(JSON.parse(kappaOut.stdout).kappa).toEqual(apiReport.kappa);
    expect(JSON.parse(mqmOut.stdout).error_counts).toEqual(apiReport.error_counts);
    expect(JSON.parse(mqmOut.stdout).mqm).toEqual(apiReport.mqm);
    expect(JSON.parse(sqmOut.stdout).sqm).toEqual(apiReport.sqm);

    // the two grammar-minor tags are in the totals
    const counts = apiReport.error_counts as { grand_total: number };
    expect(counts.grand_total).toBe(2);
  }, 30000);

  it("no annotator-facing payload carried a true system identifier", () => {
    // scan everything fetched during the flows above, except the session
    // report (a researcher-facing surface that names systems by design)
    const annotatorPayloads = scannedPayloads.filter(
      (p) => !p.includes('"error_counts"'),
    );
    expect(annotatorPayloads.length).toBeGreaterThan(8);
    for (const payload of annotatorPayloads) {
      for (const trueId of TRUE_IDS) {
        expect(payload).not.toContain(trueId);
      }
      expect(payload).not.toContain("blind_map");
    }
  });
});

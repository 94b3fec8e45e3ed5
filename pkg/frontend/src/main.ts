// Entry point: read session/annotator from the query string, start the flow.

import { GatewayClient } from "./api.js";
import { mount } from "./dom.js";
import { OfflineQueue } from "./queue.js";
import { SessionFlow } from "./state.js";

const params = new URLSearchParams(window.location.search);
const session = params.get("session") ?? "session";
const annotator = params.get("annotator") ?? "";

const root = document.getElementById("app")!;
if (!annotator) {
  root.textContent = "add ?session=<id>&annotator=<name> to the URL to begin";
} else {
  const client = new GatewayClient("");
  const queue = new OfflineQueue(window.localStorage);
  const flow = new SessionFlow(client, session, annotator, queue);
  window.addEventListener("online", () => queue.flush(client));
  flow.loadTask().then(() => mount(root, flow));
}

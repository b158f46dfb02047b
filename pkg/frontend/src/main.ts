// Studio entry point: health-check the service, then mount both views.

import { ApiClient } from "./api.js";
import { SessionState } from "./state.js";
import { SweepView } from "./sweep_view.js";
import { TransferView } from "./transfer_view.js";

export async function boot(mount: HTMLElement, base = ""): Promise<{
  transfer: TransferView;
  sweep: SweepView;
  state: SessionState;
}> {
  const api = new ApiClient(base);
  const state = new SessionState();

  const header = document.createElement("header");
  const title = document.createElement("h1");
  title.textContent = "Restyle studio";
  const healthNote = document.createElement("span");
  healthNote.className = "health";
  header.append(title, healthNote);
  mount.append(header);

  const transfer = new TransferView(api, state, mount);
  const sweep = new SweepView(api, state, mount);

  const exportButton = document.createElement("button");
  exportButton.className = "export-session";
  exportButton.textContent = "Export session";
  exportButton.addEventListener("click", () => {
    const blob = new Blob([state.export()], { type: "application/json" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "restyle-session.json";
    link.click();
    URL.revokeObjectURL(link.href);
  });
  mount.append(exportButton);

  try {
    const health = await api.health();
    healthNote.textContent = `model ${health.model_id} · config ${health.config_hash}`;
    await transfer.populateExemplarSets();
  } catch {
    healthNote.textContent = "service unreachable";
    transfer.banner.hidden = false;
    transfer.banner.textContent =
      "Service unreachable — start it and reload. Inputs are preserved.";
  }
  return { transfer, sweep, state };
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void boot(document.getElementById("app") as HTMLElement);
}

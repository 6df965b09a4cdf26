/** Two-pane application shell.

Left pane: the document text, edited directly and kept authoritative by
the textual endpoint.  Right pane: the diagram of one selected view with
its operation palette, driven by the graph endpoint.  Both panes observe
one server-side model, so an edit in either shows up in the other after a
single notification round trip.
*/

import { renderGraph } from "./diagram.js";
import { GraphClient, GraphRequestError } from "./graphClient.js";
import { renderPalette } from "./palette.js";
import {
  viewContainerTarget,
  type Diagnostic,
  type GraphEdge,
  type GraphNode,
  type PaletteItem,
  type ViewDescriptor,
} from "./protocol.js";
import { whenOpen, wrapSocket } from "./socket.js";
import { TextClient } from "./textClient.js";

const URI = "file:///workspace/sample.rt";
const EDIT_DEBOUNCE_MS = 300;

const SAMPLE_TEXT = `model M {
protocol PingPong {
  out msg ping;
  in msg pong;
}

capsule Controller {
  port p : PingPong;
  part w : Worker;
  connect p to w.q;
  statemachine {
    initial -> Idle;
    state Idle;
    state Pinging;
    state Waiting;
    Idle -> Pinging / send_ping();
    Pinging -> Waiting on p.ping;
    Waiting -> Idle on p.pong [acked];
  }
}

capsule Worker {
  port q : ~PingPong;
}
}
`;

// operations acting on the view's container element rather than a selection
const CONTAINER_OPERATIONS = new Set([
  "AddProtocol",
  "AddCapsule",
  "AddPort",
  "AddPart",
  "AddConnector",
  "AddState",
  "AddCompositeState",
  "AddTransition",
  "SetInitial",
]);

interface Elements {
  editor: HTMLTextAreaElement;
  diagnosticList: HTMLElement;
  viewSelect: HTMLSelectElement;
  breadcrumbs: HTMLElement;
  diagram: HTMLElement;
  palette: HTMLElement;
  banner: HTMLElement;
  staleBadge: HTMLElement;
  selectionLabel: HTMLElement;
}

interface Crumb {
  viewId: string;
  label: string;
}

class App {
  private text!: TextClient;
  private graph!: GraphClient;
  private views: ViewDescriptor[] = [];
  private crumbs: Crumb[] = [];
  private selection: GraphNode | GraphEdge | null = null;
  private modelName = "M";
  private editTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(private readonly el: Elements) {}

  async start(): Promise<void> {
    this.el.editor.value = SAMPLE_TEXT;
    this.el.editor.addEventListener("input", () => this.scheduleEdit());
    try {
      await this.connect();
    } catch (error) {
      this.showBanner(`connection failed: ${String(error)}; is the server running?`);
      return;
    }
    await this.openDocument();
  }

  private async connect(): Promise<void> {
    const base = `ws://${window.location.host}`;
    const graphRaw = new WebSocket(`${base}/graph`);
    const textRaw = new WebSocket(`${base}/text`);
    await Promise.all([whenOpen(graphRaw), whenOpen(textRaw)]);
    this.text = new TextClient(wrapSocket(textRaw), {
      onDiagnostics: (_uri, _version, diagnostics) => this.showDiagnostics(diagnostics),
      onServerEdit: (_uri, newText) => {
        this.el.editor.value = newText;
      },
    });
    this.graph = new GraphClient(wrapSocket(graphRaw), {
      onModelUpdated: (_uri, viewId) => {
        if (viewId === this.graph.currentViewId) {
          this.renderDiagram();
          this.setStale(false);
        }
      },
      onViewStale: (_uri, viewId) => {
        this.showBanner(`view ${viewId} no longer exists; back to the model overview`);
        void this.activateView("root");
      },
    });
  }

  private async openDocument(): Promise<void> {
    await this.text.initialize();
    this.text.open(URI, this.el.editor.value);
    this.views = await this.graph.listViews(URI);
    this.fillViewSelect();
    const root = this.views.find((v) => v.viewId === "root");
    if (root) {
      this.modelName = root.title.replace(/^Model /, "");
    }
    const first = this.views.find((v) => v.category === "behavior") ?? this.views[0];
    if (first) {
      await this.graph.requestModel(URI, first.viewId);
      this.el.viewSelect.value = first.viewId;
      this.crumbs = [{ viewId: first.viewId, label: first.title }];
      await this.refreshViewChrome();
    }
  }

  private fillViewSelect(): void {
    this.el.viewSelect.replaceChildren();
    for (const view of this.views) {
      const option = document.createElement("option");
      option.value = view.viewId;
      option.textContent = `${view.title} (${view.category})`;
      this.el.viewSelect.appendChild(option);
    }
    this.el.viewSelect.onchange = () => {
      void this.activateView(this.el.viewSelect.value);
    };
  }

  /** Jump straight to a view, resetting the drill trail. */
  private async activateView(viewId: string): Promise<void> {
    try {
      await this.graph.switchView(URI, viewId);
    } catch (error) {
      this.showBanner(String(error));
      return;
    }
    const descriptor = this.views.find((v) => v.viewId === viewId);
    this.crumbs = [{ viewId, label: descriptor?.title ?? viewId }];
    await this.refreshViewChrome();
  }

  private async drillInto(node: GraphNode): Promise<void> {
    const current = this.graph.currentViewId;
    if (current === null) {
      return;
    }
    try {
      const graph = await this.graph.switchView(URI, current, node.id);
      this.crumbs.push({ viewId: graph.viewId, label: node.label });
    } catch (error) {
      this.showBanner(String(error));
      return;
    }
    await this.refreshViewChrome();
  }

  private async returnToCrumb(index: number): Promise<void> {
    const crumb = this.crumbs[index];
    try {
      await this.graph.switchView(URI, crumb.viewId);
    } catch (error) {
      this.showBanner(String(error));
      return;
    }
    this.crumbs = this.crumbs.slice(0, index + 1);
    await this.refreshViewChrome();
  }

  /** Redraws everything that depends on which view is active. */
  private async refreshViewChrome(): Promise<void> {
    this.selection = null;
    this.el.selectionLabel.textContent = "nothing selected";
    this.renderDiagram();
    this.renderBreadcrumbs();
    const viewId = this.graph.currentViewId;
    if (viewId !== null) {
      const items = await this.graph.requestPalette(URI, viewId);
      renderPalette(items, this.el.palette, (item) => {
        void this.runOperation(item);
      });
    }
  }

  private renderDiagram(): void {
    renderGraph(this.graph.lastGraph, this.el.diagram, {
      onDrill: (node) => {
        void this.drillInto(node);
      },
      onSelect: (element) => {
        this.selection = element;
        this.el.selectionLabel.textContent = `${element.sourceId}`;
      },
    });
  }

  private renderBreadcrumbs(): void {
    this.el.breadcrumbs.replaceChildren();
    this.crumbs.forEach((crumb, index) => {
      if (index > 0) {
        this.el.breadcrumbs.appendChild(document.createTextNode(" / "));
      }
      const link = document.createElement("a");
      link.href = "#";
      link.textContent = crumb.label;
      link.addEventListener("click", (event) => {
        event.preventDefault();
        void this.returnToCrumb(index);
      });
      this.el.breadcrumbs.appendChild(link);
    });
  }

  private async runOperation(item: PaletteItem): Promise<void> {
    const viewId = this.graph.currentViewId;
    if (viewId === null) {
      return;
    }
    let target: string;
    if (CONTAINER_OPERATIONS.has(item.operation)) {
      target = viewContainerTarget(viewId, this.modelName);
    } else if (this.selection !== null) {
      target = this.selection.sourceId;
    } else {
      this.showBanner(`${item.label} needs a selected element; click one first`);
      return;
    }
    const payload = this.collectArguments(item);
    if (payload === null) {
      return;
    }
    try {
      await this.graph.operation(URI, viewId, {
        kind: item.operation,
        target,
        payload,
      });
      this.clearBanner();
    } catch (error) {
      if (error instanceof GraphRequestError && error.code === 1003) {
        // revision raced a text edit; resync and let the user retry
        await this.graph.requestModel(URI, viewId);
        this.renderDiagram();
        this.showBanner("the document changed underneath; diagram refreshed, try again");
        return;
      }
      this.showBanner(String(error));
    }
  }

  /** Prompts for each schema argument; null means the user backed out. */
  private collectArguments(item: PaletteItem): Record<string, unknown> | null {
    const payload: Record<string, unknown> = {};
    for (const argument of item.argumentSchema) {
      const answer = window.prompt(`${item.label}: ${argument.name}`);
      if (answer === null) {
        return null;
      }
      payload[argument.name] =
        argument.name === "conjugated" ? /^(y|yes|true)$/i.test(answer.trim()) : answer;
    }
    return payload;
  }

  private scheduleEdit(): void {
    if (this.editTimer !== null) {
      clearTimeout(this.editTimer);
    }
    this.editTimer = setTimeout(() => {
      this.editTimer = null;
      this.text.edit(this.el.editor.value);
    }, EDIT_DEBOUNCE_MS);
  }

  private showDiagnostics(diagnostics: Diagnostic[]): void {
    this.el.diagnosticList.replaceChildren();
    for (const diag of diagnostics) {
      const entry = document.createElement("li");
      const line = diag.range ? diag.range.start.line + 1 : 0;
      entry.textContent = `${diag.code} (line ${line}): ${diag.message}`;
      this.el.diagnosticList.appendChild(entry);
    }
    // a broken document freezes the diagram at its last good revision
    this.setStale(diagnostics.some((d) => d.severity === 1));
  }

  private setStale(stale: boolean): void {
    this.el.staleBadge.hidden = !stale;
  }

  private showBanner(message: string): void {
    this.el.banner.textContent = message;
    this.el.banner.hidden = false;
  }

  private clearBanner(): void {
    this.el.banner.hidden = true;
  }
}

function requireElement<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) {
    throw new Error(`missing #${id}`);
  }
  return found as T;
}

export function main(): void {
  const app = new App({
    editor: requireElement<HTMLTextAreaElement>("editor"),
    diagnosticList: requireElement("diagnostics"),
    viewSelect: requireElement<HTMLSelectElement>("view-select"),
    breadcrumbs: requireElement("breadcrumbs"),
    diagram: requireElement("diagram"),
    palette: requireElement("palette"),
    banner: requireElement("banner"),
    staleBadge: requireElement("stale-badge"),
    selectionLabel: requireElement("selection-label"),
  });
  void app.start();
}

main();

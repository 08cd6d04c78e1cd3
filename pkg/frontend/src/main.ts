import { ApiClient } from "./api";
import { ExplorerApp } from "./app";

const baseUrl =
  (import.meta.env?.VITE_API_URL as string | undefined) ?? "http://127.0.0.1:8000";

const app = new ExplorerApp(new ApiClient(baseUrl));
const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app element");
}
app.mount(root);

const params = new URLSearchParams(window.location.search);
void app.start(params.get("seed") ?? undefined);

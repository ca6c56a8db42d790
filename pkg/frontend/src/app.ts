/** Chat application: message stream, composer, quick replies and map panel.
 *
 * Typing and quick-reply clicks go through the identical send() path, and at
 * most one message request is in flight at a time (the composer is disabled
 * while waiting).
 */

import { ApiClient } from './api.js';
import { createBubble, createErrorBubble } from './components/bubbles.js';
import { MapView } from './components/mapView.js';
import { createStatusCard } from './components/statusCard.js';
import { createSymptomList } from './components/symptomList.js';
import { el } from './components/dom.js';
import type { Attachment } from './types.js';

export class ChatApp {
  readonly root: HTMLElement;
  private readonly api: ApiClient;
  private readonly stream: HTMLDivElement;
  private readonly input: HTMLInputElement;
  private readonly sendButton: HTMLButtonElement;
  private readonly mapPanel: HTMLDivElement;
  private mapView: MapView | null = null;
  private sessionId: string | null = null; // held in memory only
  private pending = false;

  constructor(root: HTMLElement, api: ApiClient = new ApiClient()) {
    this.root = root;
    this.api = api;

    this.stream = el('div', 'stream');
    this.mapPanel = el('div', 'map-panel');
    this.input = el('input', 'composer-input');
    this.input.type = 'text';
    this.input.placeholder = 'Type a message';
    this.sendButton = el('button', 'composer-send', 'Send');
    this.sendButton.type = 'button';

    const composer = el('div', 'composer');
    composer.appendChild(this.input);
    composer.appendChild(this.sendButton);

    root.appendChild(this.stream);
    root.appendChild(this.mapPanel);
    root.appendChild(composer);

    this.sendButton.addEventListener('click', () => void this.sendFromComposer());
    this.input.addEventListener('keydown', (event) => {
      if (event.key === 'Enter') void this.sendFromComposer();
    });
  }

  /** Open the session and render the greeting; banner with retry on failure. */
  async start(): Promise<void> {
    this.root.querySelector('.connection-banner')?.remove();
    try {
      const session = await this.api.createSession();
      this.sessionId = session.session_id;
      this.stream.appendChild(createBubble('bot', session.greeting));
    } catch {
      const banner = el('div', 'connection-banner');
      banner.appendChild(el('span', 'connection-text', 'Could not reach the chat service.'));
      const retry = el('button', 'connection-retry', 'Retry');
      retry.type = 'button';
      retry.addEventListener('click', () => void this.start());
      banner.appendChild(retry);
      this.root.appendChild(banner);
    }
  }

  private async sendFromComposer(): Promise<void> {
    const text = this.input.value;
    if (!text.trim()) return; // empty input is blocked client-side
    this.input.value = '';
    await this.send(text);
  }

  /** The single send path used by both typed text and quick-reply clicks. */
  async send(text: string): Promise<void> {
    if (!this.sessionId || this.pending) return;
    this.pending = true;
    this.sendButton.disabled = true;
    this.stream.appendChild(createBubble('user', text));
    try {
      const response = await this.api.sendMessage(this.sessionId, text);
      const bubble = createBubble('bot', response.reply, {
        attachmentNode: await this.renderAttachment(response.attachment),
        quickReplies: response.quick_replies,
        onQuickReply: (label) => void this.send(label),
      });
      this.stream.appendChild(bubble);
    } catch (error) {
      this.stream.appendChild(createErrorBubble(`Something went wrong: ${String(error)}`));
    } finally {
      this.pending = false;
      this.sendButton.disabled = false;
    }
  }

  private async renderAttachment(attachment: Attachment | null): Promise<HTMLElement | undefined> {
    if (!attachment) return undefined;
    switch (attachment.type) {
      case 'status_card':
        return createStatusCard(attachment, (region) => void this.showMap(region));
      case 'symptom_list':
        return createSymptomList(attachment);
      case 'map': {
        await this.showMap(attachment.region ?? undefined);
        return undefined; // the map renders in its own panel
      }
    }
  }

  /** Load /api/map into the side panel, optionally zooming onto a country. */
  async showMap(focusCountry?: string): Promise<void> {
    try {
      const points = await this.api.getMap();
      this.mapPanel.replaceChildren();
      this.mapView = new MapView(points);
      this.mapPanel.appendChild(this.mapView.element);
      if (focusCountry) this.mapView.focus(focusCountry);
    } catch (error) {
      this.mapPanel.replaceChildren(createErrorBubble(`Map unavailable: ${String(error)}`));
    }
  }
}

export function mount(root: HTMLElement, api?: ApiClient): ChatApp {
  return new ChatApp(root, api);
}
